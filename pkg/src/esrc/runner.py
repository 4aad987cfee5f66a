"""Parameter sweeps over the Monte Carlo pipeline and deterministic CSV output.

A sweep is a base operating point plus value lists for any of the five
sweepable parameters (snr_db, rho, l_band, m, omega).  Points run in
lexicographic order over that fixed parameter order, each with a seed
derived by hashing the master seed together with the point's parameter
values, so editing one axis never perturbs the other points' streams.
"""

from __future__ import annotations

import hashlib
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from esrc.analytic import BetaVector, esrc_closed_form
from esrc.channel import FadingParams, SemiCorrelationMode
from esrc.config import MAX_SEED, SystemConfig
from esrc.correlation import CorrelationSpec
from esrc.statfit import FitConvergenceError, fit_exponential, fit_gamma_ml
from esrc.zf import MonteCarloAbort, monte_carlo_esrc

log = logging.getLogger(__name__)

AXIS_ORDER = ("snr_db", "rho", "l_band", "m", "omega")
PRESET_NAMES = ("fig1", "fig2", "fig3")
DEFAULT_TRIALS = 100_000

CSV_HEADER = (
    "snr_db,rho,l_band,m,omega,trials,seed,esrc_mc,esrc_stderr,"
    "esrc_analytic,rel_err,alpha_mean,gof_pass_rate,status"
)

_SCALAR_KEYS = (
    "preset",
    "n_t",
    "n_r",
    "snr_db",
    "rho",
    "l_band",
    "m",
    "omega",
    "side",
    "trials",
    "seed",
)


class ConfigError(ValueError):
    """A configuration document that cannot become a valid sweep plan."""


@dataclass(frozen=True)
class SweepPlan:
    """A base operating point plus the value axes swept over it."""

    base: SystemConfig
    axes: Tuple[Tuple[str, Tuple[float, ...]], ...] = ()
    preset: Optional[str] = None

    def __post_init__(self):
        n_side = self.base.mode.correlated_count(self.base.n_r, self.base.n_t)
        normalized = []
        for name, values in self.axes:
            if name not in AXIS_ORDER:
                raise ValueError(
                    f"unknown sweep axis {name!r}; valid axes: {', '.join(AXIS_ORDER)}"
                )
            vals = tuple(_coerce_axis_value(name, v, n_side) for v in values)
            if not vals:
                raise ValueError(f"sweep axis {name!r} has no values")
            if len(set(vals)) != len(vals):
                raise ValueError(f"sweep axis {name!r} lists a value twice")
            normalized.append((name, vals))
        names = [name for name, _ in normalized]
        if len(set(names)) != len(names):
            raise ValueError("sweep axis names must be unique")
        normalized.sort(key=lambda item: AXIS_ORDER.index(item[0]))
        object.__setattr__(self, "axes", tuple(normalized))
        if self.preset is not None and self.preset not in PRESET_NAMES:
            raise ValueError(
                f"unknown preset {self.preset!r}; valid presets: {', '.join(PRESET_NAMES)}"
            )

    def points(self) -> Iterator[Dict[str, float]]:
        """Cartesian product of the axes, lexicographic in AXIS_ORDER.

        Every yielded dict carries all five sweepable parameters, swept or
        not, so the seed hash never depends on which axes happen to exist.
        """
        base = self.base
        fixed = {
            "snr_db": float(base.snr_db),
            "rho": float(base.correlation.rho),
            "l_band": int(base.correlation.l_band),
            "m": float(base.fading.m),
            "omega": float(base.fading.omega),
        }
        names = [name for name, _ in self.axes]
        lists = [values for _, values in self.axes]
        for combo in itertools.product(*lists):
            point = dict(fixed)
            point.update(zip(names, combo))
            yield point


def _coerce_axis_value(name, value, n_side):
    if name == "l_band":
        if float(value) != int(value):
            raise ValueError(f"l_band values must be integers, got {value!r}")
        iv = int(value)
        if iv > n_side - 1:
            raise ValueError(f"l_band exceeds n-1 (n={n_side}, got {iv})")
        if iv < 0:
            raise ValueError(f"l_band out of range [0, {n_side - 1}], got {iv}")
        return iv
    fv = float(value)
    if not math.isfinite(fv):
        raise ValueError(f"{name} values must be finite, got {value!r}")
    if name == "rho" and not 0.0 <= fv < 1.0:
        raise ValueError(f"rho out of range [0, 1), got {fv!r}")
    if name in ("m", "omega") and not fv > 0.0:
        raise ValueError(f"{name} out of range (0, inf), got {fv!r}")
    return fv


@dataclass(frozen=True)
class SweepRow:
    """One CSV row: the point, its derived seed, and the results (if any)."""

    snr_db: float
    rho: float
    l_band: int
    m: float
    omega: float
    trials: int
    seed: int
    esrc_mc: Optional[float]
    esrc_stderr: Optional[float]
    esrc_analytic: Optional[float]
    rel_err: Optional[float]
    alpha_mean: Optional[float]
    gof_pass_rate: Optional[float]
    status: str


def point_seed(master_seed: int, point: Dict[str, float]) -> int:
    """Per-point seed: blake2b over the master seed and parameter values.

    Hash-based rather than index-based so adding or removing values on one
    axis never changes any other point's stream.
    """
    if not 0 <= int(master_seed) <= MAX_SEED:
        raise ValueError(f"master seed must be a 64-bit unsigned integer, got {master_seed!r}")
    digest = hashlib.blake2b(digest_size=8)
    digest.update(int(master_seed).to_bytes(8, "little"))
    for name in AXIS_ORDER:
        digest.update(f"{name}={float(point[name])!r};".encode("ascii"))
    return int.from_bytes(digest.digest(), "little")


def _point_label(point):
    return (
        f"snr_db={point['snr_db']:g} rho={point['rho']:g} "
        f"l_band={point['l_band']} m={point['m']:g} omega={point['omega']:g}"
    )


def _config_for_point(base: SystemConfig, point, seed: int) -> SystemConfig:
    n_side = base.mode.correlated_count(base.n_r, base.n_t)
    return SystemConfig(
        n_t=base.n_t,
        n_r=base.n_r,
        snr_db=point["snr_db"],
        fading=FadingParams(m=point["m"], omega=point["omega"]),
        correlation=CorrelationSpec(n=n_side, rho=point["rho"], l_band=int(point["l_band"])),
        mode=base.mode,
        trials=base.trials,
        seed=seed,
    )


def _run_point(config: SystemConfig, point, full_fit: bool) -> SweepRow:
    result, samples = monte_carlo_esrc(config)
    betas = [fit_exponential(samples.samples[k]) for k in range(samples.n_users)]
    analytic = esrc_closed_form(BetaVector(betas))
    alpha_mean = None
    gof_pass_rate = None
    if full_fit:
        fits = [fit_gamma_ml(samples.samples[k]) for k in range(samples.n_users)]
        alpha_mean = float(np.mean([fit.alpha for fit in fits]))
        gof_pass_rate = float(np.mean([fit.chi2_pass and fit.ks_pass for fit in fits]))
    return SweepRow(
        snr_db=point["snr_db"],
        rho=point["rho"],
        l_band=int(point["l_band"]),
        m=point["m"],
        omega=point["omega"],
        trials=config.trials,
        seed=config.seed,
        esrc_mc=result.esrc_mc,
        esrc_stderr=result.std_err,
        esrc_analytic=analytic,
        rel_err=abs(result.esrc_mc - analytic) / analytic,
        alpha_mean=alpha_mean,
        gof_pass_rate=gof_pass_rate,
        status="ok",
    )


def run_sweep(plan: SweepPlan, full_fit: bool = False) -> List[SweepRow]:
    """Run every point of the plan in deterministic order.

    A point whose Monte Carlo aborts (or whose full fit fails to converge)
    becomes a status=failed row with empty result columns; the sweep keeps
    going so one bad corner does not cost the whole table.
    """
    rows: List[SweepRow] = []
    points = list(plan.points())
    log.info("sweep of %d points, %d trials each", len(points), plan.base.trials)
    for point in points:
        seed = point_seed(plan.base.seed, point)
        config = _config_for_point(plan.base, point, seed)
        try:
            row = _run_point(config, point, full_fit)
            log.info("%s: esrc_mc=%.6g rel_err=%.2e", _point_label(point), row.esrc_mc, row.rel_err)
        except (MonteCarloAbort, FitConvergenceError) as exc:
            log.warning("%s: failed (%s)", _point_label(point), exc)
            row = SweepRow(
                snr_db=point["snr_db"],
                rho=point["rho"],
                l_band=int(point["l_band"]),
                m=point["m"],
                omega=point["omega"],
                trials=config.trials,
                seed=seed,
                esrc_mc=None,
                esrc_stderr=None,
                esrc_analytic=None,
                rel_err=None,
                alpha_mean=None,
                gof_pass_rate=None,
                status="failed",
            )
        rows.append(row)
    return rows


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".9g")


def render_csv(rows: Sequence[SweepRow]) -> str:
    """Serialize rows under the fixed header; floats carry 9 significant digits."""
    lines = [CSV_HEADER]
    for row in rows:
        lines.append(
            ",".join(
                (
                    _cell(row.snr_db),
                    _cell(row.rho),
                    _cell(int(row.l_band)),
                    _cell(row.m),
                    _cell(row.omega),
                    _cell(int(row.trials)),
                    _cell(int(row.seed)),
                    _cell(row.esrc_mc),
                    _cell(row.esrc_stderr),
                    _cell(row.esrc_analytic),
                    _cell(row.rel_err),
                    _cell(row.alpha_mean),
                    _cell(row.gof_pass_rate),
                    row.status,
                )
            )
        )
    return "\n".join(lines) + "\n"


def emit_csv(rows: Sequence[SweepRow], destination) -> str:
    """Write the CSV table to a path; reruns of the same plan are byte-identical."""
    text = render_csv(rows)
    with open(destination, "w", encoding="ascii", newline="") as fh:
        fh.write(text)
    return str(destination)


def parse_config(
    text: str,
    *,
    preset: Optional[str] = None,
    trials: Optional[int] = None,
    seed: Optional[int] = None,
    allow_extended: bool = False,
) -> SweepPlan:
    """Turn a configuration document into a validated SweepPlan.

    The document is line-oriented ``key = value`` with optional
    ``[sweep.<param>]`` sections, each carrying a ``values = v1, v2, ...``
    list.  ``#`` starts a comment.  The keyword arguments are command-line
    overrides and take precedence over the document's own keys.
    """
    scalars, axis_specs = _parse_document(text)

    doc_preset = str(scalars.pop("preset", (0, "none"))[1])
    chosen_preset = preset if preset is not None else doc_preset
    if chosen_preset not in PRESET_NAMES + ("none",):
        raise ConfigError(
            f"unknown preset {chosen_preset!r}; valid presets: {', '.join(PRESET_NAMES)} or none"
        )

    given = _typed_scalars(scalars, allow_extended)
    if trials is not None:
        given["trials"] = _check_trials(trials)
    if seed is not None:
        given["seed"] = _check_seed(seed)

    n_t = given.get("n_t", 8)
    n_r = given.get("n_r", 8)
    try:
        mode = SemiCorrelationMode(given.get("side", "transmit"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    n_side = mode.correlated_count(n_r, n_t)

    if chosen_preset != "none":
        base_values, axes = _expand_preset(chosen_preset, given, axis_specs, n_side, allow_extended)
    else:
        base_values = {
            "snr_db": given.get("snr_db", 10.0),
            "rho": given.get("rho", 0.0),
            "l_band": given.get("l_band", n_side - 1),
            "m": given.get("m", 1.0),
            "omega": given.get("omega", 1.0),
        }
        axes = [
            (param, _axis_values(param, raw, lineno, n_side, allow_extended))
            for param, (lineno, raw) in axis_specs.items()
        ]

    if base_values["l_band"] == "full":
        base_values["l_band"] = n_side - 1
    _check_scalar_ranges(base_values, n_side, allow_extended)

    try:
        base = SystemConfig(
            n_t=n_t,
            n_r=n_r,
            snr_db=base_values["snr_db"],
            fading=FadingParams(m=base_values["m"], omega=base_values["omega"]),
            correlation=CorrelationSpec(
                n=n_side, rho=base_values["rho"], l_band=int(base_values["l_band"])
            ),
            mode=mode,
            trials=given.get("trials", DEFAULT_TRIALS),
            seed=given.get("seed", 0),
        )
        return SweepPlan(
            base=base,
            axes=tuple(axes),
            preset=None if chosen_preset == "none" else chosen_preset,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _parse_document(text):
    """Split the document into raw scalar entries and sweep-section entries."""
    scalars = {}
    axes = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"line {lineno}: malformed section header {line!r}")
            name = line[1:-1].strip()
            if not name.startswith("sweep."):
                raise ConfigError(
                    f"line {lineno}: unknown section [{name}]; only [sweep.<param>] is allowed"
                )
            param = name[len("sweep.") :]
            if param not in AXIS_ORDER:
                raise ConfigError(
                    f"line {lineno}: unknown sweep parameter {param!r}; "
                    f"valid axes: {', '.join(AXIS_ORDER)}"
                )
            if param in axes:
                raise ConfigError(f"line {lineno}: duplicate sweep section for {param!r}")
            axes[param] = None
            section = param
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not value:
            raise ConfigError(f"line {lineno}: key {key!r} has no value")
        if section is None:
            if key not in _SCALAR_KEYS:
                raise ConfigError(
                    f"line {lineno}: unknown key {key!r}; valid keys: {', '.join(_SCALAR_KEYS)}"
                )
            if key in scalars:
                raise ConfigError(f"line {lineno}: duplicate key {key!r}")
            scalars[key] = (lineno, value)
        else:
            if key != "values":
                raise ConfigError(
                    f"line {lineno}: only 'values' may appear inside [sweep.{section}], got {key!r}"
                )
            if axes[section] is not None:
                raise ConfigError(f"line {lineno}: duplicate values for [sweep.{section}]")
            axes[section] = (lineno, value)
    for param, entry in axes.items():
        if entry is None:
            raise ConfigError(f"[sweep.{param}] section is missing its values list")
    return scalars, axes


def _parse_float(key, raw, lineno):
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"line {lineno}: {key} must be a real number, got {raw!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"line {lineno}: {key} must be finite, got {raw!r}")
    return value


def _parse_int(key, raw, lineno):
    try:
        return int(raw, 10)
    except ValueError:
        raise ConfigError(f"line {lineno}: {key} must be an integer, got {raw!r}") from None


def _check_trials(value):
    if int(value) != value or value < 1:
        raise ConfigError(f"trials out of range [1, inf), got {value!r}")
    return int(value)


def _check_seed(value):
    if int(value) != value or not 0 <= value <= MAX_SEED:
        raise ConfigError(f"seed out of range [0, 2^64-1], got {value!r}")
    return int(value)


def _typed_scalars(scalars, allow_extended):
    """Convert raw scalar strings to their types; range checks come later."""
    given = {}
    for key, (lineno, raw) in scalars.items():
        if key in ("n_t", "n_r"):
            value = _parse_int(key, raw, lineno)
            if value < 1:
                raise ConfigError(f"line {lineno}: {key} out of range [1, inf), got {value}")
        elif key == "trials":
            value = _check_trials(_parse_int(key, raw, lineno))
        elif key == "seed":
            value = _check_seed(_parse_int(key, raw, lineno))
        elif key == "side":
            value = raw
            if value not in ("transmit", "receive"):
                raise ConfigError(
                    f"line {lineno}: side must be 'transmit' or 'receive', got {raw!r}"
                )
        elif key == "l_band":
            value = "full" if raw == "full" else _parse_int(key, raw, lineno)
        elif key in ("snr_db", "rho", "m", "omega"):
            value = _parse_float(key, raw, lineno)
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        given[key] = value
    return given


def _rho_range(allow_extended):
    return "[0, 1)" if allow_extended else "[0, 0.5]"


def _rho_ok(value, allow_extended):
    if allow_extended:
        return 0.0 <= value < 1.0
    return 0.0 <= value <= 0.5


def _check_scalar_ranges(base_values, n_side, allow_extended):
    rho = base_values["rho"]
    if not _rho_ok(rho, allow_extended):
        raise ConfigError(f"rho out of range {_rho_range(allow_extended)}, got {rho!r}")
    l_band = base_values["l_band"]
    if int(l_band) != l_band:
        raise ConfigError(f"l_band must be an integer, got {l_band!r}")
    if l_band > n_side - 1:
        raise ConfigError(f"l_band exceeds n-1 (n={n_side}, got {int(l_band)})")
    if l_band < 0:
        raise ConfigError(f"l_band out of range [0, {n_side - 1}], got {int(l_band)}")
    if not base_values["m"] > 0.0:
        raise ConfigError(f"m out of range (0, inf), got {base_values['m']!r}")
    if not base_values["omega"] > 0.0:
        raise ConfigError(f"omega out of range (0, inf), got {base_values['omega']!r}")


def _axis_values(param, raw, lineno, n_side, allow_extended):
    items = [item.strip() for item in raw.split(",")]
    if any(not item for item in items):
        raise ConfigError(f"line {lineno}: empty entry in the {param} values list")
    values = []
    for item in items:
        if param == "l_band":
            values.append(_parse_int(param, item, lineno))
        else:
            values.append(_parse_float(param, item, lineno))
    for value in values:
        if param == "rho" and not _rho_ok(value, allow_extended):
            raise ConfigError(
                f"line {lineno}: rho out of range {_rho_range(allow_extended)}, got {value!r}"
            )
        if param == "l_band":
            if value > n_side - 1:
                raise ConfigError(f"line {lineno}: l_band exceeds n-1 (n={n_side}, got {value})")
            if value < 0:
                raise ConfigError(
                    f"line {lineno}: l_band out of range [0, {n_side - 1}], got {value}"
                )
        if param in ("m", "omega") and not value > 0.0:
            raise ConfigError(f"line {lineno}: {param} out of range (0, inf), got {value!r}")
    if len(set(values)) != len(values):
        raise ConfigError(f"line {lineno}: the {param} values list repeats a value")
    return tuple(values)


def _expand_preset(name, given, axis_specs, n_side, allow_extended):
    """Fill in a preset's axes and base defaults.

    The preset owns the snr_db/rho/l_band/m axes outright (any such user
    sections are superseded); an omega section survives because the fading
    power is an optional extra axis on every preset.  Preset base values are
    defaults: an explicit scalar in the document still wins.
    """
    if name == "fig1":
        axes = [
            ("snr_db", tuple(float(v) for v in range(21))),
            ("m", (0.7, 2.5)),
        ]
        defaults = {"rho": 0.3, "l_band": n_side - 1}
    elif name == "fig2":
        axes = [
            ("l_band", tuple(range(1, n_side))),
            ("m", (0.7, 2.5)),
        ]
        defaults = {"snr_db": 10.0, "rho": 0.5}
    else:
        axes = [
            ("rho", (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)),
            ("m", (0.7, 2.5)),
        ]
        defaults = {"snr_db": 10.0, "l_band": 3}
    if "omega" in axis_specs:
        lineno, raw = axis_specs["omega"]
        axes.append(("omega", _axis_values("omega", raw, lineno, n_side, allow_extended)))
    base_values = {
        "snr_db": given.get("snr_db", defaults.get("snr_db", 10.0)),
        "rho": given.get("rho", defaults.get("rho", 0.0)),
        "l_band": given.get("l_band", defaults.get("l_band", n_side - 1)),
        "m": given.get("m", 1.0),
        "omega": given.get("omega", 1.0),
    }
    return base_values, axes

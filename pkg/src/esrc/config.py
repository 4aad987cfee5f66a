"""System configuration tying antennas, fading, correlation, and the run seed."""

from __future__ import annotations

from dataclasses import dataclass

from esrc.channel import FadingParams, SemiCorrelationMode
from esrc.correlation import CorrelationSpec

MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class SystemConfig:
    """One Monte Carlo operating point.

    Each transmit antenna carries one single-antenna user's stream, so
    n_users = n_t always; zero-forcing needs n_r >= n_t.  The correlation
    matrix lives on mode.side and must match that side's antenna count.
    """

    n_t: int
    n_r: int
    snr_db: float
    fading: FadingParams
    correlation: CorrelationSpec
    mode: SemiCorrelationMode
    trials: int
    seed: int

    def __post_init__(self):
        if int(self.n_t) != self.n_t or self.n_t < 1:
            raise ValueError(f"n_t must be a positive integer, got {self.n_t!r}")
        if int(self.n_r) != self.n_r or self.n_r < 1:
            raise ValueError(f"n_r must be a positive integer, got {self.n_r!r}")
        if self.n_r < self.n_t:
            raise ValueError(
                f"zero-forcing needs n_r >= n_t, got n_r={self.n_r!r} < n_t={self.n_t!r}"
            )
        expected = self.mode.correlated_count(self.n_r, self.n_t)
        if self.correlation.n != expected:
            raise ValueError(
                f"correlation.n={self.correlation.n!r} but the {self.mode.side} side "
                f"has {expected} antennas"
            )
        if int(self.trials) != self.trials or self.trials < 1:
            raise ValueError(f"trials must be a positive integer, got {self.trials!r}")
        if int(self.seed) != self.seed or not (0 <= self.seed <= MAX_SEED):
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")

    @property
    def n_users(self):
        return self.n_t

    @property
    def snr_linear(self):
        return 10.0 ** (self.snr_db / 10.0)

"""Tests for the closed-form capacity, its MGF, and the inverted density."""

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.signal import fftconvolve

from esrc.analytic import (
    BetaVector,
    capacity_pdf,
    default_capacity_grid,
    esrc_closed_form,
    mgf_mean_check,
    per_user_capacity_quadrature,
    sum_capacity_mgf,
)
from esrc.specfun import LN2, NumericalError, gm_pdf

ORACLE_BETAS = (0.01, 0.1, 1.0, 10.0, 100.0, 1000.0)


class TestBetaVector:
    def test_valid(self):
        b = BetaVector([0.5, 2.0, 7.0])
        assert b.n_users == 3
        assert b.betas == (0.5, 2.0, 7.0)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            BetaVector([])

    def test_rejects_nonpositive_or_nonfinite(self):
        with pytest.raises(ValueError):
            BetaVector([1.0, 0.0])
        with pytest.raises(ValueError):
            BetaVector([1.0, -2.0])
        with pytest.raises(ValueError):
            BetaVector([1.0, np.inf])

    def test_rejects_matrix(self):
        with pytest.raises(ValueError):
            BetaVector(np.ones((2, 2)))


class TestEsrcClosedForm:
    def test_unit_beta(self):
        assert esrc_closed_form(BetaVector([1.0])) == pytest.approx(
            0.8603473822708866, rel=1e-12
        )

    def test_additivity_over_identical_users(self):
        one = esrc_closed_form(BetaVector([1.0]))
        three = esrc_closed_form(BetaVector([1.0, 1.0, 1.0]))
        assert three == pytest.approx(3.0 * one, rel=1e-14)
        assert three == pytest.approx(2.5811, abs=2e-4)

    def test_concatenation_is_additive(self):
        a = BetaVector([0.3, 4.0])
        b = BetaVector([1.7])
        joined = BetaVector([0.3, 4.0, 1.7])
        total = esrc_closed_form(a) + esrc_closed_form(b)
        assert esrc_closed_form(joined) == pytest.approx(total, rel=1e-12)

    def test_vanishes_with_beta(self):
        # capacity ~ beta/ln2 as beta -> 0
        val = esrc_closed_form(BetaVector([1e-8]))
        assert val == pytest.approx(1e-8 / LN2, rel=1e-3)
        assert esrc_closed_form(BetaVector([1e-12])) < val

    def test_strictly_increasing_in_each_beta(self):
        for beta in (0.05, 0.5, 1.0, 8.0, 120.0):
            lo = esrc_closed_form(BetaVector([beta]))
            hi = esrc_closed_form(BetaVector([beta * (1.0 + 1e-6)]))
            assert hi > lo

    def test_jensen_upper_bound(self):
        for beta in ORACLE_BETAS:
            assert esrc_closed_form(BetaVector([beta])) < np.log2(1.0 + beta)

    def test_overflowing_beta_names_culprit(self):
        with pytest.raises(NumericalError, match="1e-320"):
            esrc_closed_form(BetaVector([1e-320]))


class TestQuadratureOracle:
    def test_matches_closed_form(self):
        for beta in ORACLE_BETAS:
            closed = esrc_closed_form(BetaVector([beta]))
            assert per_user_capacity_quadrature(beta) == pytest.approx(
                closed, rel=1e-8
            ), beta

    def test_jensen_bracket_beta_ten(self):
        val = per_user_capacity_quadrature(10.0)
        assert 2.0 < val < np.log2(11.0)

    def test_small_beta_expansion(self):
        assert per_user_capacity_quadrature(0.01) == pytest.approx(
            0.01 / LN2, rel=0.02
        )

    def test_rejects_bad_beta(self):
        with pytest.raises(ValueError):
            per_user_capacity_quadrature(0.0)


class TestSumCapacityMgf:
    def test_normalization_at_zero(self):
        rng = np.random.default_rng(71)
        for _ in range(25):
            n = rng.integers(1, 9)
            b = BetaVector(rng.uniform(0.01, 100.0, size=n))
            assert sum_capacity_mgf(0.0, b) == pytest.approx(1.0, abs=1e-12)

    def test_boundary_value_frozen(self):
        # M(-ln2) for beta=1 is E[1/(1+gamma)] = e * Gamma(0, 1)
        val = sum_capacity_mgf(-LN2, BetaVector([1.0]))
        assert val == pytest.approx(0.5963473623231940, abs=1e-12)
        oracle, _ = quad(lambda u: np.exp(-u) / (1.0 + u), 0.0, np.inf)
        assert val == pytest.approx(oracle, rel=1e-10)

    def test_product_structure(self):
        single = sum_capacity_mgf(0.37, BetaVector([1.0]))
        double = sum_capacity_mgf(0.37, BetaVector([1.0, 1.0]))
        assert double == pytest.approx(single**2, rel=1e-12)

    def test_matches_moment_quadrature(self):
        # M(s) = E[(1 + beta*u)^{s/ln2}] under a unit exponential u
        for s, beta in ((0.5, 2.0), (-0.3, 0.5), (-LN2, 1.0), (1.0, 0.25)):
            oracle, _ = quad(
                lambda u: (1.0 + beta * u) ** (s / LN2) * np.exp(-u),
                0.0,
                np.inf,
                limit=200,
            )
            assert sum_capacity_mgf(s, BetaVector([beta])) == pytest.approx(
                oracle, rel=1e-10
            ), (s, beta)

    def test_complex_argument(self):
        s = complex(0.3, 1.7)
        beta = 0.8
        real, _ = quad(
            lambda u: ((1.0 + beta * u) ** (s / LN2) * np.exp(-u)).real, 0.0, np.inf
        )
        imag, _ = quad(
            lambda u: ((1.0 + beta * u) ** (s / LN2) * np.exp(-u)).imag, 0.0, np.inf
        )
        val = sum_capacity_mgf(s, BetaVector([beta]))
        assert isinstance(val, complex)
        assert val == pytest.approx(complex(real, imag), rel=1e-9)

    def test_rejects_left_of_boundary(self):
        with pytest.raises(ValueError, match="convergence"):
            sum_capacity_mgf(-0.70, BetaVector([1.0]))
        with pytest.raises(ValueError, match="convergence"):
            sum_capacity_mgf(complex(-0.75, 2.0), BetaVector([1.0]))


class TestMgfMeanCheck:
    def test_unit_beta(self):
        b = BetaVector([1.0])
        assert mgf_mean_check(b) == pytest.approx(esrc_closed_form(b), rel=1e-5)

    def test_degenerate_limit(self):
        assert mgf_mean_check(BetaVector([1e-8])) < 1e-7

    def test_additivity(self):
        got = mgf_mean_check(BetaVector([0.5, 2.0]))
        parts = esrc_closed_form(BetaVector([0.5])) + esrc_closed_form(BetaVector([2.0]))
        assert got == pytest.approx(parts, rel=1e-5)

    def test_random_vectors_match_closed_form(self):
        rng = np.random.default_rng(72)
        for _ in range(10):
            n = rng.integers(1, 9)
            b = BetaVector(rng.uniform(0.01, 100.0, size=n))
            target = esrc_closed_form(b)
            assert abs(mgf_mean_check(b) - target) / target < 1e-5

    def test_rejects_bad_step(self):
        with pytest.raises(ValueError):
            mgf_mean_check(BetaVector([1.0]), step=1e-7)
        with pytest.raises(ValueError):
            mgf_mean_check(BetaVector([1.0]), step=1e-2)


class TestDefaultCapacityGrid:
    def test_shape_and_ordering(self):
        grid = default_capacity_grid(BetaVector([1.0, 2.0]), points=128)
        assert grid.size == 128
        assert grid[0] > 0.0
        assert np.all(np.diff(grid) > 0.0)
        assert grid[-1] <= 64.0

    def test_covers_the_mass(self):
        b = BetaVector([10.0, 10.0, 10.0])
        grid = default_capacity_grid(b)
        dens = capacity_pdf(b, grid)
        # the default grid trades a tiny leading gap for tail coverage
        assert np.trapezoid(dens, grid) > 0.99

    def test_rejects_bad_points(self):
        with pytest.raises(ValueError):
            default_capacity_grid(BetaVector([1.0]), points=4)


class TestCapacityPdf:
    def test_single_user_matches_gm_closed_form(self):
        for beta in (0.2, 1.0, 5.0):
            b = BetaVector([beta])
            grid = default_capacity_grid(b, points=96)
            dens = capacity_pdf(b, grid)
            ref = gm_pdf(grid, LN2, 1.0 / beta)
            assert np.max(np.abs(dens - ref)) < 1e-4, beta

    def test_two_users_match_self_convolution(self):
        b = BetaVector([1.0, 1.0])
        grid = np.linspace(0.05, 10.0, 160)
        dens = capacity_pdf(b, grid)
        dx = 0.001
        x = np.arange(0.0, 16.0, dx)
        f = gm_pdf(x, LN2, 1.0)
        # trapezoid-corrected discrete self-convolution
        conv = (fftconvolve(f, f)[: x.size] - f[0] * f) * dx
        ref = np.interp(grid, x, conv)
        assert np.max(np.abs(dens - ref)) < 1e-3

    def test_normalization_and_mean(self):
        rng = np.random.default_rng(73)
        for _ in range(3):
            b = BetaVector(rng.uniform(0.5, 20.0, size=rng.integers(1, 5)))
            coarse = default_capacity_grid(b)
            # wide grid: reuse the automatic upper edge but start near zero
            grid = np.linspace(1e-3, coarse[-1], 600)
            dens = capacity_pdf(b, grid)
            assert np.min(dens) > -1e-4
            mass = np.trapezoid(dens, grid)
            assert 0.999 <= mass <= 1.001
            mean = np.trapezoid(grid * dens, grid)
            assert mean == pytest.approx(esrc_closed_form(b), rel=1e-2)

    def test_rejects_bad_grids(self):
        b = BetaVector([1.0])
        with pytest.raises(ValueError):
            capacity_pdf(b, np.array([0.0, 1.0]))
        with pytest.raises(ValueError):
            capacity_pdf(b, np.array([2.0, 1.0]))
        with pytest.raises(ValueError):
            capacity_pdf(b, np.array([1.0, 65.0]))
        with pytest.raises(ValueError):
            capacity_pdf(b, np.ones((2, 2)))

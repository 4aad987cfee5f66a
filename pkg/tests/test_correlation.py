"""Tests for banded correlation construction, PSD gating, and matrix roots."""

import numpy as np
import pytest

from esrc.correlation import (
    CorrelationSpec,
    NotPositiveSemidefiniteError,
    build_banded_correlation,
    matrix_sqrt,
    psd_check,
)


class TestCorrelationSpec:
    def test_rejects_bad_n(self):
        with pytest.raises(ValueError):
            CorrelationSpec(n=0, rho=0.3, l_band=0)
        with pytest.raises(ValueError):
            CorrelationSpec(n=2.5, rho=0.3, l_band=1)

    def test_rejects_rho_out_of_range(self):
        with pytest.raises(ValueError):
            CorrelationSpec(n=4, rho=1.0, l_band=1)
        with pytest.raises(ValueError):
            CorrelationSpec(n=4, rho=-0.1, l_band=1)

    def test_rejects_bad_l_band(self):
        with pytest.raises(ValueError):
            CorrelationSpec(n=4, rho=0.3, l_band=4)
        with pytest.raises(ValueError):
            CorrelationSpec(n=4, rho=0.3, l_band=-1)


class TestBuildBandedCorrelation:
    def test_zero_rho_is_identity(self):
        r = build_banded_correlation(CorrelationSpec(n=5, rho=0.0, l_band=4))
        assert np.array_equal(r, np.eye(5))

    def test_zero_band_is_identity(self):
        r = build_banded_correlation(CorrelationSpec(n=5, rho=0.45, l_band=0))
        assert np.array_equal(r, np.eye(5))

    def test_tridiagonal_layout(self):
        r = build_banded_correlation(CorrelationSpec(n=4, rho=0.5, l_band=1))
        expected = np.array(
            [
                [1.0, 0.5, 0.0, 0.0],
                [0.5, 1.0, 0.5, 0.0],
                [0.0, 0.5, 1.0, 0.5],
                [0.0, 0.0, 0.5, 1.0],
            ]
        )
        assert np.array_equal(r, expected)

    def test_outside_band_exactly_zero(self):
        for l_band in range(8):
            r = build_banded_correlation(CorrelationSpec(n=8, rho=0.49, l_band=l_band))
            idx = np.arange(8)
            lag = np.abs(idx[:, None] - idx[None, :])
            assert np.all(r[lag > l_band] == 0.0)
            assert np.all(r[lag <= l_band] != 0.0)

    def test_full_band_matches_exponential_profile(self):
        idx = np.arange(8)
        lag = np.abs(idx[:, None] - idx[None, :]).astype(float)
        r = build_banded_correlation(CorrelationSpec(n=8, rho=0.37, l_band=7))
        assert np.array_equal(r, 0.37**lag)

    def test_symmetric_unit_diagonal(self):
        r = build_banded_correlation(CorrelationSpec(n=6, rho=0.5, l_band=2))
        assert np.array_equal(r, r.T)
        assert np.array_equal(np.diag(r), np.ones(6))


class TestPsdCheck:
    def test_identity(self):
        report = psd_check(np.eye(4))
        assert report.is_psd
        assert report.min_eig == pytest.approx(1.0, abs=1e-12)

    def test_tridiagonal_min_eigenvalue(self):
        # symmetric tridiagonal Toeplitz: eigenvalues 1 + 2*rho*cos(k*pi/(n+1))
        r = build_banded_correlation(CorrelationSpec(n=8, rho=0.5, l_band=1))
        report = psd_check(r)
        assert report.is_psd
        assert report.min_eig == pytest.approx(1.0 - np.cos(np.pi / 9.0), rel=1e-12)
        assert report.min_eig == pytest.approx(0.0603073792140917, abs=1e-13)

    def test_detects_indefinite(self):
        # aggressive truncation at large rho leaves the PSD cone
        r = build_banded_correlation(CorrelationSpec(n=8, rho=0.9, l_band=1))
        report = psd_check(r)
        assert not report.is_psd
        assert report.min_eig < -0.5

    def test_tolerance_absorbs_roundoff(self):
        x = np.ones(3)
        m = np.outer(x, x)
        assert psd_check(m).is_psd

    def test_sweep_grid_is_psd(self):
        # every operating point of the nominal sweeps must pass the gate
        for rho in (0.0, 0.1, 0.2, 0.3, 0.4, 0.5):
            for l_band in range(1, 8):
                r = build_banded_correlation(CorrelationSpec(n=8, rho=rho, l_band=l_band))
                assert psd_check(r, tol=1e-12).is_psd, (rho, l_band)

    def test_rejects_non_square(self):
        with pytest.raises(ValueError, match="square"):
            psd_check(np.ones((2, 3)))

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError, match="Hermitian"):
            psd_check(np.array([[1.0, 0.2], [0.3, 1.0]]))

    def test_rejects_negative_tol(self):
        with pytest.raises(ValueError):
            psd_check(np.eye(2), tol=-1e-3)


class TestMatrixSqrt:
    def test_two_by_two_closed_form(self):
        # eigenvalues 1 +/- rho give sqrt entries (sqrt(1.5) +/- sqrt(0.5)) / 2
        m = np.array([[1.0, 0.5], [0.5, 1.0]])
        s = matrix_sqrt(m)
        a = 0.5 * (np.sqrt(1.5) + np.sqrt(0.5))
        b = 0.5 * (np.sqrt(1.5) - np.sqrt(0.5))
        assert s == pytest.approx(np.array([[a, b], [b, a]]), abs=1e-14)
        assert a == pytest.approx(0.9659258262890683, abs=1e-15)
        assert b == pytest.approx(0.2588190451025208, abs=1e-15)

    def test_diagonal(self):
        s = matrix_sqrt(np.diag([4.0, 9.0, 0.25]))
        assert s == pytest.approx(np.diag([2.0, 3.0, 0.5]), abs=1e-14)

    def test_round_trip_over_sweep_grid(self):
        for n in range(2, 9):
            for rho in (0.0, 0.1, 0.2, 0.3, 0.4, 0.5):
                for l_band in range(n):
                    spec = CorrelationSpec(n=n, rho=rho, l_band=l_band)
                    r = build_banded_correlation(spec)
                    s = matrix_sqrt(r, spec=spec)
                    err = np.linalg.norm(s @ s - r, ord="fro")
                    assert err <= 1e-10 * n, (spec, err)

    def test_result_is_hermitian_and_psd(self):
        r = build_banded_correlation(CorrelationSpec(n=8, rho=0.5, l_band=3))
        s = matrix_sqrt(r)
        assert np.array_equal(s, s.conj().T)
        assert psd_check(s).is_psd

    def test_complex_hermitian_input(self):
        a = np.array([[2.0, 0.5 + 0.25j], [0.5 - 0.25j, 1.0]])
        s = matrix_sqrt(a)
        assert np.allclose(s, s.conj().T, atol=1e-15)
        assert np.allclose(s @ s, a, atol=1e-14)

    def test_rank_deficient_clamps_roundoff(self):
        x = np.array([1.0, 2.0, 3.0])
        m = np.outer(x, x)
        s = matrix_sqrt(m)
        assert np.allclose(s @ s, m, atol=1e-12)

    def test_indefinite_raises_with_min_eig(self):
        spec = CorrelationSpec(n=8, rho=0.9, l_band=1)
        r = build_banded_correlation(spec)
        with pytest.raises(NotPositiveSemidefiniteError) as excinfo:
            matrix_sqrt(r, spec=spec)
        assert excinfo.value.min_eig < -0.5
        assert "CorrelationSpec" in str(excinfo.value)

    def test_clamp_mode_projects_without_renormalizing(self):
        r = build_banded_correlation(CorrelationSpec(n=8, rho=0.9, l_band=1))
        s = matrix_sqrt(r, clamp=True)
        eigvals, eigvecs = np.linalg.eigh(r)
        projected = (eigvecs * np.clip(eigvals, 0.0, None)) @ eigvecs.conj().T
        assert np.allclose(s @ s, projected, atol=1e-12)
        # dropping negative eigenvalues inflates the trace; no renormalization
        # pulls the diagonal back to one
        assert np.trace(s @ s) > np.trace(r) + 0.5
        assert not np.allclose(np.diag(s @ s), 1.0, atol=1e-3)

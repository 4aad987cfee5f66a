"""Banded exponential antenna correlation matrices.

The spatial correlation between antenna elements i and j is modeled as
rho^|i-j| and then truncated to a band: entries with |i - j| beyond the
band limit are set to zero.  A band limit of 1 keeps a tridiagonal
matrix, 2 a pentadiagonal one, and n - 1 the full exponential profile.
(Descriptions of the truncation in terms of a "threshold of k elements"
map to l_band = k - 1: a threshold of 2 elements is tridiagonal.)
Truncation can push the matrix out of the positive-semidefinite cone for
large rho, which is why construction and square-rooting are separated by
an explicit eigenvalue check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class NotPositiveSemidefiniteError(ValueError):
    """Raised when a matrix fails the PSD gate; carries min_eig."""

    def __init__(self, message, min_eig=None):
        super().__init__(message)
        self.min_eig = min_eig


@dataclass(frozen=True)
class CorrelationSpec:
    """Size n, coefficient rho in [0, 1), and band half-width l_band.

    l_band counts off-diagonals kept on each side of the main diagonal,
    so l_band = 0 is the identity and l_band = n - 1 is untruncated.
    """

    n: int
    rho: float
    l_band: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not (0.0 <= self.rho < 1.0):
            raise ValueError(f"rho must lie in [0, 1), got {self.rho!r}")
        if int(self.l_band) != self.l_band or not (0 <= self.l_band <= self.n - 1):
            raise ValueError(
                f"l_band must be an integer in [0, n-1], got {self.l_band!r} for n={self.n!r}"
            )


@dataclass(frozen=True)
class PsdReport:
    min_eig: float
    is_psd: bool


def build_banded_correlation(spec):
    """Real symmetric Toeplitz matrix with entries rho^|i-j| inside the band."""
    idx = np.arange(spec.n)
    lag = np.abs(idx[:, None] - idx[None, :])
    return np.where(lag <= spec.l_band, np.power(spec.rho, lag.astype(float)), 0.0)


def psd_check(matrix, tol=1e-12):
    """Smallest-eigenvalue report for a Hermitian matrix.

    is_psd is true when min_eig >= -tol, so eigensolver round-off on a
    genuinely PSD matrix does not trip the gate.
    """
    if tol < 0.0:
        raise ValueError(f"tol must be non-negative, got {tol!r}")
    arr = np.asarray(matrix)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    if not np.allclose(arr, arr.conj().T, rtol=0.0, atol=1e-12):
        raise ValueError("matrix is not Hermitian")
    try:
        eigs = np.linalg.eigvalsh(arr)
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError(
            f"eigendecomposition failed for {arr.shape[0]}x{arr.shape[1]} matrix "
            f"(fingerprint {hash(arr.tobytes()) & 0xFFFFFFFF:08x})"
        ) from exc
    min_eig = float(eigs[0])
    return PsdReport(min_eig=min_eig, is_psd=min_eig >= -tol)


def matrix_sqrt(matrix, tol=1e-12, spec=None, clamp=False):
    """Hermitian square root via eigendecomposition.

    Eigenvalues in [-tol, 0) are treated as rounding debris and clamped
    to zero.  Anything below -tol raises NotPositiveSemidefiniteError
    unless clamp=True, which zeroes every negative eigenvalue without
    renormalizing the diagonal (dropping negative eigenvalues inflates
    the trace; callers opt into that model change explicitly).
    """
    arr = np.asarray(matrix)
    report = psd_check(arr, tol=tol)
    if not report.is_psd and not clamp:
        origin = f" for {spec!r}" if spec is not None else ""
        raise NotPositiveSemidefiniteError(
            f"matrix is not positive semidefinite{origin}: "
            f"min eigenvalue {report.min_eig:.6e}",
            min_eig=report.min_eig,
        )
    eigvals, eigvecs = np.linalg.eigh(arr)
    eigvals = np.clip(eigvals, 0.0, None)
    root = (eigvecs * np.sqrt(eigvals)) @ eigvecs.conj().T
    # exact Hermitian symmetry by construction
    return 0.5 * (root + root.conj().T)

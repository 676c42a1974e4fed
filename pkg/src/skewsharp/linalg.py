"""Dense complex Hermitian linear algebra with an explicit tolerance policy.

All tolerances are relative to max(1, max|entry|) of the matrix at hand:

* TOL_HERM / TOL_EIG = 1e-10  (Hermiticity deviation, eigen reconstruction)
* TOL_PSD            = 1e-9   (admissible negative-eigenvalue dip)
* TOL_TRACE          = 1e-9   (density-matrix trace deviation)

Eigenvalues in [-tol_psd, 0) are clipped to 0 before sqrt/ratio use; more
negative values are errors, never silently repaired.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

TOL_HERM = 1e-10
TOL_EIG = 1e-10
TOL_PSD = 1e-9
TOL_TRACE = 1e-9
# Eigenvalues of a state below this (relative) floor are zeroed: sqrt(rho) of
# eigenvalue noise ~1e-16 would otherwise inject ~1e-8 spurious components.
TOL_STATE_CLIP = 1e-13


class SkewsharpError(Exception):
    """Base class for all validation and contract errors."""


class NonHermitianInput(SkewsharpError):
    pass


class NotPSD(SkewsharpError):
    pass


class DimensionMismatch(SkewsharpError):
    pass


class InvalidState(SkewsharpError):
    """Density-matrix validation failure (trace, positivity)."""


def mat_scale(A: np.ndarray) -> float:
    """Relative-tolerance scale: max(1, max|entry|)."""
    if A.size == 0:
        return 1.0
    return max(1.0, float(np.abs(A).max()))


def hermiticity_deviation(A: np.ndarray) -> float:
    return float(np.abs(A - A.conj().T).max())


def require_square(A: np.ndarray, what: str = "matrix") -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"{what} must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise SkewsharpError(f"{what} has non-finite entries")
    return A


def require_hermitian(A: np.ndarray, tol: float = TOL_HERM, what: str = "matrix") -> np.ndarray:
    """Validate A = A^dagger within tol * max(1, max|A|) and return the Hermitian part."""
    A = require_square(A, what)
    dev = hermiticity_deviation(A)
    if dev > tol * mat_scale(A):
        raise NonHermitianInput(
            f"{what} is non-Hermitian: max|A - A^dag| = {dev:.3e} exceeds tol {tol:.1e} (relative)"
        )
    return (A + A.conj().T) / 2


@dataclass(eq=False)
class EigenSystem:
    """Spectral decomposition with eigenvalues sorted in descending order."""

    eigenvalues: np.ndarray   # real, descending
    eigenvectors: np.ndarray  # orthonormal columns, eigenvectors[:, k] <-> eigenvalues[k]

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T


def spectral_decompose(A: np.ndarray, tol: float = TOL_HERM) -> EigenSystem:
    """Eigendecompose a Hermitian matrix; raises NonHermitianInput on bad input."""
    A = require_hermitian(A, tol)
    w, V = np.linalg.eigh(A)
    return EigenSystem(eigenvalues=w[::-1].copy(), eigenvectors=V[:, ::-1].copy())


def clip_psd_eigenvalues(w: np.ndarray, scale: float, tol: float = TOL_PSD) -> np.ndarray:
    """Clip eigenvalues in [-tol*scale, 0) to 0; raise NotPSD below that."""
    lo = float(w.min()) if w.size else 0.0
    if lo < -tol * scale:
        raise NotPSD(f"min eigenvalue {lo:.3e} below -{tol:.1e} * {scale:.3e}")
    return np.maximum(w, 0.0)


def matrix_sqrt_psd(A: np.ndarray, tol_psd: float = TOL_PSD) -> np.ndarray:
    """Principal square root of a PSD Hermitian matrix via eigendecomposition."""
    es = spectral_decompose(A)
    w = clip_psd_eigenvalues(es.eigenvalues, mat_scale(A), tol_psd)
    V = es.eigenvectors
    R = (V * np.sqrt(w)) @ V.conj().T
    return (R + R.conj().T) / 2


@dataclass(eq=False)
class PsdCheck:
    verdict: bool
    min_eigenvalue: float


def is_psd(A: np.ndarray, tol: float = TOL_PSD) -> PsdCheck:
    """PSD verdict against -tol * max(1, max|A|); reports the raw min eigenvalue."""
    A = require_hermitian(A)
    w = np.linalg.eigvalsh(A)
    lo = float(w[0]) if w.size else 0.0
    return PsdCheck(verdict=lo >= -tol * mat_scale(A), min_eigenvalue=lo)


def det_hermitian(A: np.ndarray) -> float:
    """Determinant of a Hermitian matrix as the product of its eigenvalues."""
    A = require_hermitian(A)
    w = np.linalg.eigvalsh(A)
    return float(np.prod(w)) if w.size else 1.0


@dataclass(eq=False)
class DensityMatrix:
    """Validated quantum state with cached eigensystem.

    Eigenvalues are clipped to [0, ...] after the positivity check, so rank
    deficient (pure) states are safe inputs to sqrt/log-style maps.
    """

    matrix: np.ndarray
    eigenvalues: np.ndarray = field(repr=False)   # clipped, descending
    eigenvectors: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_matrix(cls, rho: np.ndarray, tol_trace: float = TOL_TRACE,
                    tol_psd: float = TOL_PSD) -> "DensityMatrix":
        rho = require_hermitian(rho, what="state")
        tr = float(np.trace(rho).real)
        if abs(tr - 1.0) > tol_trace:
            raise InvalidState(f"state trace = {tr:.12g}, expected 1 within {tol_trace:.1e}")
        es = spectral_decompose(rho)
        try:
            w = clip_psd_eigenvalues(es.eigenvalues, mat_scale(rho), tol_psd)
        except NotPSD as exc:
            raise InvalidState(f"state not positive semidefinite: {exc}") from exc
        w[w < TOL_STATE_CLIP * mat_scale(rho)] = 0.0
        return cls(matrix=rho, eigenvalues=w, eigenvectors=es.eigenvectors)

    @cached_property
    def sqrt(self) -> np.ndarray:
        V = self.eigenvectors
        R = (V * np.sqrt(self.eigenvalues)) @ V.conj().T
        return (R + R.conj().T) / 2

    def expectation(self, X: np.ndarray) -> float:
        return float(np.trace(self.matrix @ X).real)

    def rank(self, tol: float = TOL_PSD) -> int:
        return int(np.count_nonzero(self.eigenvalues > tol * mat_scale(self.matrix)))

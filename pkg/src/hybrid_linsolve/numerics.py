"""Dense complex linear algebra for the classical side of the solvers.

Matrices and vectors are plain ``numpy`` arrays (complex128). Every function
is pure. The rank cutoff is always relative: singular values (or shifted
eigenvalues) below ``rank_tolerance × largest`` are treated as zero.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .config import HERMITIAN_TOLERANCE, RANGE_TOLERANCE, RANK_TOLERANCE
from .errors import ContractError, DomainError, NumericalError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SvdFactorization:
    """Thin SVD ``a = left @ diag(singular_values) @ right.conj().T``."""
    left: np.ndarray
    singular_values: np.ndarray
    right: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.left * self.singular_values) @ self.right.conj().T


@dataclass(frozen=True)
class SpectralMetrics:
    spectral_norm: float
    pinv_norm: float
    condition_number: float
    frobenius_norm: float


def as_matrix(a) -> np.ndarray:
    """Coerce to a finite 2-D complex array."""
    arr = np.asarray(a, dtype=complex)
    if arr.ndim != 2:
        raise ContractError(f"expected a 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ContractError("matrix entries must be finite")
    return arr


def as_vector(v) -> np.ndarray:
    """Coerce to a finite 1-D complex array."""
    arr = np.asarray(v, dtype=complex)
    if arr.ndim != 1:
        raise ContractError(f"expected a 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ContractError("vector entries must be finite")
    return arr


def svd(a) -> SvdFactorization:
    """Thin SVD with a fixed phase convention.

    The first entry of each right singular vector whose magnitude is not
    negligible is made real and nonnegative; the matching left vector gets
    the same phase so the product is unchanged.
    """
    a = as_matrix(a)
    try:
        u, s, vh = la.svd(a, full_matrices=False, lapack_driver="gesdd")
    except (np.linalg.LinAlgError, ValueError):
        try:
            u, s, vh = la.svd(a, full_matrices=False, lapack_driver="gesvd")
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise NumericalError(f"SVD did not converge for a {a.shape} matrix") from exc
    v = vh.conj().T
    for k in range(v.shape[1]):
        column = v[:, k]
        scale = np.max(np.abs(column)) if column.size else 0.0
        nonzero = np.flatnonzero(np.abs(column) > 1e-12 * max(scale, 1.0))
        if nonzero.size == 0:
            continue
        pivot = column[nonzero[0]]
        phase = pivot / abs(pivot)
        v[:, k] = column * np.conj(phase)
        u[:, k] = u[:, k] * np.conj(phase)
    return SvdFactorization(left=u, singular_values=s, right=v)


def _kept(singular_values: np.ndarray, rank_tolerance: float) -> np.ndarray:
    if singular_values.size == 0:
        return np.zeros(0, dtype=bool)
    cutoff = rank_tolerance * singular_values[0]
    return singular_values > cutoff


def pseudo_inverse(a, rank_tolerance: float = RANK_TOLERANCE) -> np.ndarray:
    """Moore-Penrose pseudo-inverse ``V Σ⁺ U†``."""
    if rank_tolerance < 0:
        raise ContractError(f"rank_tolerance must be ≥ 0, got {rank_tolerance}")
    f = svd(a)
    keep = _kept(f.singular_values, rank_tolerance)
    inv = np.zeros_like(f.singular_values)
    inv[keep] = 1.0 / f.singular_values[keep]
    return (f.right * inv) @ f.left.conj().T


def spectral_metrics(a, rank_tolerance: float = RANK_TOLERANCE) -> SpectralMetrics:
    """σ_max, 1/σ_min (nonzero), their ratio, and the Frobenius norm."""
    f = svd(a)
    keep = _kept(f.singular_values, rank_tolerance)
    if f.singular_values.size == 0 or f.singular_values[0] == 0.0 or not keep.any():
        raise DomainError("spectral metrics are undefined for the all-zero matrix")
    sigma_max = float(f.singular_values[0])
    sigma_min = float(f.singular_values[keep][-1])
    return SpectralMetrics(
        spectral_norm=sigma_max,
        pinv_norm=1.0 / sigma_min,
        condition_number=sigma_max / sigma_min,
        frobenius_norm=float(np.sqrt(np.sum(f.singular_values ** 2))),
    )


def hermitian_part(v) -> np.ndarray:
    v = as_matrix(v)
    return (v + v.conj().T) / 2


def _check_hermitian(v: np.ndarray) -> None:
    if v.shape[0] != v.shape[1]:
        raise ContractError(f"expected a square matrix, got shape {v.shape}")
    scale = max(1.0, float(np.max(np.abs(v))) if v.size else 0.0)
    skew = float(np.max(np.abs(v - v.conj().T))) if v.size else 0.0
    if skew > HERMITIAN_TOLERANCE * scale:
        raise ContractError(
            f"matrix is not Hermitian: max |V - V†| = {skew:.3e} "
            f"exceeds tolerance {HERMITIAN_TOLERANCE:.0e}"
        )


def solve_shifted(v, q, lam: float, rank_tolerance: float = RANK_TOLERANCE) -> np.ndarray:
    """Return ``(V + λI)⁺ q`` through an eigendecomposition of the Hermitian V.

    With λ = 0 this is the pseudo-inverse solve; null-space components of q
    are dropped rather than amplified.
    """
    v = as_matrix(v)
    q = as_vector(q)
    if lam < 0:
        raise ContractError(f"lambda must be ≥ 0, got {lam}")
    _check_hermitian(v)
    if q.shape[0] != v.shape[0]:
        raise ContractError(f"rhs has dimension {q.shape[0]}, matrix has {v.shape[0]}")
    try:
        w, basis = la.eigh(hermitian_part(v))
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError("Hermitian eigendecomposition did not converge") from exc
    shifted = w + lam
    largest = float(np.max(np.abs(shifted))) if shifted.size else 0.0
    inv = np.zeros_like(shifted)
    keep = np.abs(shifted) > rank_tolerance * largest
    inv[keep] = 1.0 / shifted[keep]
    return basis @ (inv * (basis.conj().T @ q))


def in_range(v, q, rank_tolerance: float = RANK_TOLERANCE) -> bool:
    """True when ``‖V V⁺ q − q‖ ≤ 1e-8‖q‖``."""
    v = as_matrix(v)
    q = as_vector(q)
    projected = v @ (pseudo_inverse(v, rank_tolerance) @ q)
    return bool(np.linalg.norm(projected - q) <= RANGE_TOLERANCE * max(np.linalg.norm(q), 1e-300))


def perturbation_bound(v, q, lam: float, rank_tolerance: float = RANK_TOLERANCE) -> float:
    """Upper bound ``λ‖V⁺‖²‖q‖`` on ``‖V⁺q − (V + λI)⁻¹q‖``.

    Only valid for a consistent system, so q must lie in the range of V.
    """
    v = as_matrix(v)
    q = as_vector(q)
    if lam == 0:
        return 0.0
    q_norm = float(np.linalg.norm(q))
    if q_norm == 0.0:
        return 0.0
    if not in_range(v, q, rank_tolerance):
        raise ContractError("q is not in the range of V; the shift bound needs a consistent system")
    pinv_norm = spectral_metrics(v, rank_tolerance).pinv_norm
    return lam * pinv_norm ** 2 * q_norm

"""Using a classical solution ŷ = Σ s_i |a_i⟩ without ever writing it out.

Both estimators reduce to sums of overlaps between column states, so the
solution vector never has to be materialized on the quantum side.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuit import Circuit, compose
from .config import IMAGINARY_RESIDUE_TOLERANCE
from .errors import ContractError
from .hadamard import estimate_overlap
from .instances import ColumnOracle
from .simulator import derive_seed
from .transpiler import ControlStrategy

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ObservableSpec:
    """H = Σ γ_k H_k with unitary terms and 0 < γ_k ≤ Δ_H."""
    terms: tuple[tuple[float, Circuit], ...]
    delta_h: float

    def __post_init__(self) -> None:
        if not self.terms:
            raise ContractError("an observable needs at least one term")
        widths = {c.width for _, c in self.terms}
        if len(widths) != 1:
            raise ContractError(f"observable terms have mixed widths {sorted(widths)}")
        for gamma, _ in self.terms:
            if not 0 < gamma <= self.delta_h:
                raise ContractError(f"term weight {gamma} outside (0, Δ_H = {self.delta_h}]")

    @property
    def k_h(self) -> int:
        return len(self.terms)

    @property
    def width(self) -> int:
        return self.terms[0][1].width


@dataclass(frozen=True)
class ObservableEstimate:
    value: float
    imaginary_residue: float


def _coefficients(s, columns: Sequence[ColumnOracle]) -> np.ndarray:
    coeffs = np.asarray(s, dtype=complex).reshape(-1)
    if coeffs.shape[0] != len(columns):
        raise ContractError(f"{coeffs.shape[0]} coefficients for {len(columns)} columns")
    return coeffs


def _check_width(columns: Sequence[ColumnOracle], width: int, what: str) -> None:
    for j, c in enumerate(columns):
        if c.width != width:
            raise ContractError(f"column {j} has width {c.width}, {what} has width {width}")


def inner_product_with_state(
    s,
    columns: Sequence[ColumnOracle],
    v: ColumnOracle,
    shots: int,
    seed: int,
    strategy: ControlStrategy = ControlStrategy(),
) -> complex:
    """⟨v|ŷ⟩ = Σ_i s_i ⟨v|a_i⟩ for the normalized state |v⟩.

    ``shots = 0`` evaluates every overlap exactly.
    """
    coeffs = _coefficients(s, columns)
    _check_width(columns, v.width, "v")
    total = 0j
    for i, (coeff, column) in enumerate(zip(coeffs, columns)):
        if coeff == 0:
            continue
        overlap = estimate_overlap(v.prep, column.prep, shots, derive_seed(seed, f"inner:{i}"), strategy)
        total += coeff * overlap.value
    return total


def observable_expectation(
    s,
    columns: Sequence[ColumnOracle],
    obs: ObservableSpec,
    shots: int,
    seed: int,
    strategy: ControlStrategy = ControlStrategy(),
) -> ObservableEstimate:
    """ŷ†Hŷ = Σ_{i,j,k} s_i* γ_j s_k ⟨a_i|H_j|a_k⟩."""
    coeffs = _coefficients(s, columns)
    _check_width(columns, obs.width, "the observable")
    total = 0j
    for j, (gamma, term) in enumerate(obs.terms):
        for k, column in enumerate(columns):
            if coeffs[k] == 0:
                continue
            rotated = compose(column.prep, term)
            for i, other in enumerate(columns):
                if coeffs[i] == 0:
                    continue
                overlap = estimate_overlap(
                    other.prep, rotated, shots, derive_seed(seed, f"observable:{i}:{j}:{k}"), strategy,
                )
                total += np.conj(coeffs[i]) * gamma * coeffs[k] * overlap.value
    residue = abs(total.imag)
    if residue > IMAGINARY_RESIDUE_TOLERANCE:
        logger.warning("observable estimate carries an imaginary residue of %.3e", residue)
    return ObservableEstimate(value=float(total.real), imaginary_residue=residue)


def sample_budget_inner_product(m: int, frobenius_norm: float, alpha_norm: float, epsilon: float) -> float:
    """Total measurements M‖A‖_F²‖α‖²/ε² for an ε-accurate ⟨v|ŷ⟩."""
    if not epsilon > 0:
        raise ContractError(f"epsilon must be > 0, got {epsilon}")
    return m * frobenius_norm ** 2 * alpha_norm ** 2 / epsilon ** 2


def sample_budget_observable(
    obs: ObservableSpec, frobenius_norm: float, alpha_norm: float, eta: float, epsilon: float,
) -> float:
    """Total measurements Δ_H²K_H²‖A‖_F⁴(η² + ‖α‖²)²/ε²."""
    if not epsilon > 0:
        raise ContractError(f"epsilon must be > 0, got {epsilon}")
    return (
        obs.delta_h ** 2 * obs.k_h ** 2 * frobenius_norm ** 4 * (eta ** 2 + alpha_norm ** 2) ** 2 / epsilon ** 2
    )

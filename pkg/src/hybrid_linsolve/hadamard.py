"""Hadamard-test circuits and overlap estimation.

The ancilla is qubit 0 of every emitted test circuit. For the imaginary
part the ancilla receives S† before the final Hadamard, so that
Pr(0) = (1 + Im⟨0|U|0⟩)/2 holds with a plus sign, matching the real part.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from .circuit import Circuit, compose, h, inverse, sdg
from .config import DEFAULT_DELTA, VALID_PARTS, Part
from .errors import ContractError
from .simulator import apply, derive_seed, first_qubit_zero_probability, overlap_amplitude, sample_zeros, zero_state
from .transpiler import ControlledCircuit, ControlStrategy, DepthReport, control_circuit, depth_report

logger = logging.getLogger(__name__)

PHASE_CONVENTION = "S† on the ancilla for Im, so Pr(0) = (1 + Im⟨0|U|0⟩)/2"


@dataclass(frozen=True)
class OverlapEstimate:
    value: complex
    shots_per_part: int
    standard_error: float
    seed: int

    @property
    def exact(self) -> bool:
        return self.shots_per_part == 0


@dataclass(frozen=True)
class HadamardProbabilities:
    """Exact ancilla Pr(0) for both quadratures of one overlap."""
    p0_re: float
    p0_im: float
    report: DepthReport

    @property
    def value(self) -> complex:
        return complex(2 * self.p0_re - 1, 2 * self.p0_im - 1)


def _check_part(part: str) -> None:
    if part not in VALID_PARTS:
        raise ContractError(f"unknown part '{part}'. Valid values: {', '.join(sorted(VALID_PARTS))}")


def _wrap(controlled: ControlledCircuit, part: Part) -> Circuit:
    width = controlled.circuit.width
    anc = controlled.control
    closing = [sdg(anc), h(anc)] if part == "im" else [h(anc)]
    return compose(
        Circuit.from_gates(width, [h(anc)]),
        controlled.circuit,
        Circuit.from_gates(width, closing),
    )


def build_hadamard_test(u: Circuit, part: Part, strategy: ControlStrategy = ControlStrategy()) -> Circuit:
    """H, controlled-U, (S† for Im), H with the ancilla on qubit 0."""
    _check_part(part)
    return _wrap(control_circuit(u, strategy), part)


def hoeffding_radius(shots: int, delta: float = DEFAULT_DELTA) -> float:
    """Half-width of the 1 − δ confidence band of one quadrature estimate."""
    if shots < 1:
        raise ContractError(f"shots must be ≥ 1, got {shots}")
    if not 0 < delta < 1:
        raise ContractError(f"delta must lie in (0, 1), got {delta}")
    return math.sqrt(math.log(2 / delta) / (2 * shots))


def _check_widths(a: Circuit, b: Circuit) -> None:
    if a.width != b.width:
        raise ContractError(f"overlap circuits have widths {a.width} and {b.width}")


def _test_report(controlled: ControlledCircuit) -> DepthReport:
    return depth_report(
        controlled, _wrap(controlled, "im"), overhead=3, notes={"phase_convention": PHASE_CONVENTION},
    )


def hadamard_depth_report(a: Circuit, b: Circuit, strategy: ControlStrategy = ControlStrategy()) -> DepthReport:
    """DepthReport of the test circuit for ⟨0|A†B|0⟩, without simulating it."""
    _check_widths(a, b)
    return _test_report(control_circuit(compose(b, inverse(a)), strategy))


def hadamard_probabilities(a: Circuit, b: Circuit, strategy: ControlStrategy = ControlStrategy()) -> HadamardProbabilities:
    """Simulate the test circuits for ⟨0|A†B|0⟩ once."""
    _check_widths(a, b)
    controlled = control_circuit(compose(b, inverse(a)), strategy)
    probabilities = {}
    for part in ("re", "im"):
        circuit = _wrap(controlled, part)
        probabilities[part] = first_qubit_zero_probability(apply(circuit, zero_state(circuit.width)))
    return HadamardProbabilities(
        p0_re=probabilities["re"], p0_im=probabilities["im"], report=_test_report(controlled),
    )


def sample_overlap(probabilities: HadamardProbabilities, shots: int, seed: int) -> OverlapEstimate:
    """Draw independent shot batches for Re and Im from precomputed Pr(0)."""
    if shots < 1:
        raise ContractError(f"shots must be ≥ 1, got {shots}")
    parts = []
    variance = 0.0
    for part, p0 in (("re", probabilities.p0_re), ("im", probabilities.p0_im)):
        result = sample_zeros(p0, shots, derive_seed(seed, part))
        freq = result.zeros / shots
        parts.append(2 * freq - 1)
        variance += 4 * freq * (1 - freq) / shots
    return OverlapEstimate(complex(parts[0], parts[1]), shots, math.sqrt(variance), seed)


def estimate_overlap(
    a: Circuit,
    b: Circuit,
    shots: int,
    seed: int,
    strategy: ControlStrategy = ControlStrategy(),
) -> OverlapEstimate:
    """Estimate ⟨0|A†B|0⟩; ``shots = 0`` returns the exact amplitude."""
    _check_widths(a, b)
    if shots < 0:
        raise ContractError(f"shots must be ≥ 0, got {shots}")
    if shots == 0:
        return OverlapEstimate(overlap_amplitude(compose(b, inverse(a))), 0, 0.0, seed)
    estimate = sample_overlap(hadamard_probabilities(a, b, strategy), shots, seed)
    logger.debug("overlap estimate %s ± %.3g from %d shots per part", estimate.value, estimate.standard_error, shots)
    return estimate

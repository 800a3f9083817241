"""Exact statevector simulation and seeded measurement sampling.

Amplitude index bit q is qubit q (qubit 0 is the lowest bit).
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .circuit import Circuit
from .config import MAX_STATEVECTOR_WIDTH, MAX_UNITARY_WIDTH, STATE_NORM_TOLERANCE
from .errors import ContractError, ResourceError


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        size = amps.shape[0]
        if size == 0 or size & (size - 1):
            raise ContractError(f"state length must be a power of two, got {size}")
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > STATE_NORM_TOLERANCE:
            raise ContractError(f"state must have unit norm, got {norm:.12g}")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def width(self) -> int:
        return self.amplitudes.shape[0].bit_length() - 1


@dataclass(frozen=True)
class ShotResult:
    zeros: int
    ones: int
    seed: int

    @property
    def shots(self) -> int:
        return self.zeros + self.ones


def zero_state(width: int) -> StateVector:
    return basis_state(width, 0)


def basis_state(width: int, index: int) -> StateVector:
    if not 0 <= index < 1 << width:
        raise ContractError(f"basis index {index} out of range for {width} qubits")
    amps = np.zeros(1 << width, dtype=complex)
    amps[index] = 1.0
    return StateVector(amps)


def _evolve(c: Circuit, tensor: np.ndarray) -> np.ndarray:
    """Apply every gate to ``tensor`` of shape [2]*n (+ optional batch axis)."""
    n = c.width
    for gate in c.gates():
        k = len(gate.qubits)
        axes = [n - 1 - q for q in gate.qubits]
        u = gate.matrix().reshape([2] * (2 * k))
        tensor = np.tensordot(u, tensor, axes=(list(range(k, 2 * k)), axes))
        tensor = np.moveaxis(tensor, list(range(k)), axes)
    return tensor


def apply(c: Circuit, s: StateVector) -> StateVector:
    if c.width != s.width:
        raise ContractError(f"circuit width {c.width} does not match state width {s.width}")
    if c.width > MAX_STATEVECTOR_WIDTH:
        raise ResourceError(
            f"statevector simulation is limited to {MAX_STATEVECTOR_WIDTH} qubits, got {c.width}"
        )
    if c.width == 0:
        return s
    out = _evolve(c, s.amplitudes.reshape([2] * c.width))
    return StateVector(out.reshape(-1))


def unitary_of(c: Circuit) -> np.ndarray:
    """Full 2^n × 2^n matrix of ``c``; column k is the image of basis state k."""
    if c.width > MAX_UNITARY_WIDTH:
        raise ResourceError(f"unitary extraction is limited to {MAX_UNITARY_WIDTH} qubits, got {c.width}")
    dim = 1 << c.width
    if c.width == 0:
        return np.eye(1, dtype=complex)
    batch = np.eye(dim, dtype=complex).reshape([2] * c.width + [dim])
    return _evolve(c, batch).reshape(dim, dim)


def overlap_amplitude(c: Circuit) -> complex:
    """⟨0…0| U(c) |0…0⟩."""
    return complex(apply(c, zero_state(c.width)).amplitudes[0])


def apply_classical(c: Circuit, bits: int) -> int:
    """Evaluate a reversible-classical circuit (X, CNOT, SWAP, Toffoli) on a bit string."""
    for gate in c.gates():
        qs = gate.qubits
        if gate.kind == "X":
            bits ^= 1 << qs[0]
        elif gate.kind == "CNOT":
            if bits >> qs[0] & 1:
                bits ^= 1 << qs[1]
        elif gate.kind == "Toffoli":
            if bits >> qs[0] & 1 and bits >> qs[1] & 1:
                bits ^= 1 << qs[2]
        elif gate.kind == "SWAP":
            a, b = bits >> qs[0] & 1, bits >> qs[1] & 1
            if a != b:
                bits ^= (1 << qs[0]) | (1 << qs[1])
        else:
            raise ContractError(f"{gate.kind} is not a classical reversible gate")
    return bits


def first_qubit_zero_probability(s: StateVector) -> float:
    return float(np.sum(np.abs(s.amplitudes[0::2]) ** 2))


def sample_zeros(p0: float, shots: int, seed: int) -> ShotResult:
    """Draw ``shots`` Bernoulli outcomes with Pr(0) = p0."""
    if shots < 1:
        raise ContractError(f"shots must be ≥ 1, got {shots}")
    rng = np.random.default_rng(seed)
    zeros = int(rng.binomial(shots, min(max(p0, 0.0), 1.0)))
    return ShotResult(zeros=zeros, ones=shots - zeros, seed=seed)


def sample_first_qubit(s: StateVector, shots: int, seed: int) -> ShotResult:
    return sample_zeros(first_qubit_zero_probability(s), shots, seed)


def derive_seed(master: int, label: str) -> int:
    """Child seed for one estimation task; independent of task order."""
    digest = hashlib.sha256(f"{master}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "big") & ((1 << 63) - 1)

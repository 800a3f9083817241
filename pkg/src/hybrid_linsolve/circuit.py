"""Gate-level circuit representation.

A :class:`Circuit` is an immutable list of layers; gates inside one layer act
on disjoint qubits. Qubit 0 is the lowest bit of a basis-state index. For a
multi-qubit gate the first listed qubit is the most significant bit of its
matrix (CNOT is ``(control, target)``, Toffoli is ``(c1, c2, target)``).

Single-qubit ``R`` gates carry axis-angle-phase parameters
``(theta, nx, ny, nz, phase)`` and implement
``e^{i·phase}(cos(θ/2)·I − i·sin(θ/2)·(n·σ))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .config import (
    ANGLE_EPSILON,
    AXIS_NORM_TOLERANCE,
    DEFAULT_GATE_COST,
    GATE_ARITY,
    GateKind,
    R_PARAM_COUNT,
    SINGLE_QUBIT_KINDS,
    SWAP_AS_CNOT_COST,
    TOFFOLI_COST,
    UNIT_NORM_TOLERANCE,
    VALID_GATE_KINDS,
)
from .errors import ContractError
from .topology import ConnectivityGraph

# ── Fixed matrices ────────────────────────────────────────────────────────────

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_FIXED_1Q: dict[str, np.ndarray] = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "Sdg": np.array([[1, 0], [0, -1j]], dtype=complex),
    "X": _X,
}
_ADJOINT_KIND = {"H": "H", "S": "Sdg", "Sdg": "S", "X": "X", "CNOT": "CNOT", "SWAP": "SWAP", "Toffoli": "Toffoli"}


def _permutation_matrix(images: Sequence[int]) -> np.ndarray:
    m = np.zeros((len(images), len(images)), dtype=complex)
    for col, row in enumerate(images):
        m[row, col] = 1.0
    return m


_CNOT = _permutation_matrix([0, 1, 3, 2])
_SWAP = _permutation_matrix([0, 2, 1, 3])
_TOFFOLI = _permutation_matrix([0, 1, 2, 3, 4, 5, 7, 6])


# ── Gates ─────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Gate:
    kind: GateKind
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if self.kind not in VALID_GATE_KINDS:
            raise ContractError(
                f"unknown gate kind '{self.kind}'. Valid values: {', '.join(sorted(VALID_GATE_KINDS))}"
            )
        if len(self.qubits) != GATE_ARITY[self.kind]:
            raise ContractError(
                f"{self.kind} acts on {GATE_ARITY[self.kind]} qubit(s), got {list(self.qubits)}"
            )
        if len(set(self.qubits)) != len(self.qubits):
            raise ContractError(f"{self.kind} qubits must be distinct, got {list(self.qubits)}")
        if any(q < 0 for q in self.qubits):
            raise ContractError(f"negative qubit index in {list(self.qubits)}")
        if self.kind == "R":
            if len(self.params) != R_PARAM_COUNT:
                raise ContractError(
                    f"R expects {R_PARAM_COUNT} params (theta, nx, ny, nz, phase), got {len(self.params)}"
                )
            if not all(math.isfinite(p) for p in self.params):
                raise ContractError("R params must be finite")
            axis_norm = math.sqrt(sum(p * p for p in self.params[1:4]))
            if abs(axis_norm - 1.0) > AXIS_NORM_TOLERANCE:
                raise ContractError(f"R axis must be a unit vector, got norm {axis_norm:.6g}")
        elif self.params:
            raise ContractError(f"{self.kind} takes no params, got {list(self.params)}")

    @property
    def is_single_qubit(self) -> bool:
        return self.kind in SINGLE_QUBIT_KINDS

    def matrix(self) -> np.ndarray:
        if self.kind in _FIXED_1Q:
            return _FIXED_1Q[self.kind]
        if self.kind == "R":
            theta, nx, ny, nz, phase = self.params
            sigma = nx * _X + ny * _Y + nz * _Z
            return np.exp(1j * phase) * (math.cos(theta / 2) * _I2 - 1j * math.sin(theta / 2) * sigma)
        if self.kind == "CNOT":
            return _CNOT
        if self.kind == "SWAP":
            return _SWAP
        return _TOFFOLI

    def adjoint(self) -> Gate:
        if self.kind == "R":
            theta, nx, ny, nz, phase = self.params
            return Gate("R", self.qubits, (-theta, nx, ny, nz, -phase))
        return Gate(_ADJOINT_KIND[self.kind], self.qubits)

    def relabel(self, mapping: Mapping[int, int] | Sequence[int]) -> Gate:
        return Gate(self.kind, tuple(mapping[q] for q in self.qubits), self.params)

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "qubits": list(self.qubits), "params": list(self.params)}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Gate:
        try:
            return cls(data["kind"], tuple(data["qubits"]), tuple(data.get("params", ())))
        except (KeyError, TypeError) as exc:
            raise ContractError(f"malformed gate {data!r}: {exc}") from exc


# ── Gate helpers ──────────────────────────────────────────────────────────────

def h(q: int) -> Gate:
    return Gate("H", (q,))


def s(q: int) -> Gate:
    return Gate("S", (q,))


def sdg(q: int) -> Gate:
    return Gate("Sdg", (q,))


def x(q: int) -> Gate:
    return Gate("X", (q,))


def cnot(control: int, target: int) -> Gate:
    return Gate("CNOT", (control, target))


def swap(a: int, b: int) -> Gate:
    return Gate("SWAP", (a, b))


def toffoli(c1: int, c2: int, target: int) -> Gate:
    return Gate("Toffoli", (c1, c2, target))


def rotation(q: int, theta: float, axis: Sequence[float], phase: float = 0.0) -> Gate:
    nx, ny, nz = axis
    return Gate("R", (q,), (theta, nx, ny, nz, phase))


def ry(q: int, theta: float) -> Gate:
    return rotation(q, theta, (0.0, 1.0, 0.0))


def rz(q: int, theta: float) -> Gate:
    return rotation(q, theta, (0.0, 0.0, 1.0))


def phase_gate(q: int, phi: float) -> Gate:
    """diag(1, e^{iφ})."""
    return rotation(q, phi, (0.0, 0.0, 1.0), phi / 2)


def global_phase(q: int, phi: float) -> Gate:
    """e^{iφ}·I written on one qubit."""
    return rotation(q, 0.0, (0.0, 0.0, 1.0), phi)


def t_gate(q: int) -> Gate:
    return phase_gate(q, math.pi / 4)


def tdg_gate(q: int) -> Gate:
    return phase_gate(q, -math.pi / 4)


def rotation_from_matrix(u: np.ndarray) -> tuple[float, float, float, float, float]:
    """Axis-angle-phase parameters of a 2×2 unitary."""
    u = np.asarray(u, dtype=complex)
    det = u[0, 0] * u[1, 1] - u[0, 1] * u[1, 0]
    phase = float(np.angle(det)) / 2
    v = u * np.exp(-1j * phase)
    c = float(v[0, 0].real)
    sx = float(-v[1, 0].imag)
    sy = float(v[1, 0].real)
    sz = float(-v[0, 0].imag)
    sine = math.sqrt(sx * sx + sy * sy + sz * sz)
    if sine < 1e-15:
        return (2 * math.atan2(0.0, c), 0.0, 0.0, 1.0, phase)
    return (2 * math.atan2(sine, c), sx / sine, sy / sine, sz / sine, phase)


def unitary_gate(q: int, u: np.ndarray) -> Gate:
    return Gate("R", (q,), rotation_from_matrix(u))


def _rz_matrix(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def _ry_matrix(theta: float) -> np.ndarray:
    c, sn = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -sn], [sn, c]], dtype=complex)


def zyz_decomposition(u: np.ndarray) -> tuple[float, float, float, float]:
    """Return (α, β, γ, δ) with ``u = e^{iα} Rz(β) Ry(γ) Rz(δ)``."""
    u = np.asarray(u, dtype=complex)
    det = u[0, 0] * u[1, 1] - u[0, 1] * u[1, 0]
    alpha = float(np.angle(det)) / 2
    v = u * np.exp(-1j * alpha)
    gamma = 2 * math.atan2(abs(v[1, 0]), abs(v[0, 0]))
    if abs(v[1, 0]) < 1e-14:
        total, diff = 2 * float(np.angle(v[1, 1])), 0.0
    elif abs(v[0, 0]) < 1e-14:
        total, diff = 0.0, 2 * float(np.angle(v[1, 0]))
    else:
        total, diff = 2 * float(np.angle(v[1, 1])), 2 * float(np.angle(v[1, 0]))
    beta, delta = (total + diff) / 2, (total - diff) / 2
    return alpha, beta, gamma, delta


def _is_identity(m: np.ndarray) -> bool:
    return bool(np.allclose(m, _I2, atol=1e-12, rtol=0.0))


@dataclass(frozen=True)
class ControlledRotationPlan:
    """Pieces of controlled-U for ``U = e^{iα} A X B X C`` with ``ABC = I``.

    ``after``, ``middle`` and ``before`` hold A, B and C as R gates on the
    target, or None when the factor is the identity. ``needs_cnots`` is False
    when B commutes with X, in which case the two CNOTs can be dropped.
    """
    target: int
    alpha: float
    before: Gate | None
    middle: Gate | None
    after: Gate | None
    needs_cnots: bool


def controlled_rotation_plan(target: int, u: np.ndarray) -> ControlledRotationPlan:
    alpha, beta, gamma, delta = zyz_decomposition(u)
    a = _rz_matrix(beta) @ _ry_matrix(gamma / 2)
    b = _ry_matrix(-gamma / 2) @ _rz_matrix(-(delta + beta) / 2)
    c = _rz_matrix((delta - beta) / 2)
    return ControlledRotationPlan(
        target=target,
        alpha=alpha,
        before=None if _is_identity(c) else unitary_gate(target, c),
        middle=None if _is_identity(b) else unitary_gate(target, b),
        after=None if _is_identity(a) else unitary_gate(target, a),
        needs_cnots=not (_is_identity(b) or _is_identity(-b)),
    )


def controlled_single_qubit(control: int, target: int, u: np.ndarray) -> list[Gate]:
    """Controlled-U as C, CNOT, B, CNOT, A on the target plus a phase on the control."""
    plan = controlled_rotation_plan(target, u)
    gates: list[Gate] = []
    if plan.before is not None:
        gates.append(plan.before)
    if plan.needs_cnots:
        gates.append(cnot(control, target))
    if plan.middle is not None:
        gates.append(plan.middle)
    if plan.needs_cnots:
        gates.append(cnot(control, target))
    if plan.after is not None:
        gates.append(plan.after)
    if abs(plan.alpha) > ANGLE_EPSILON:
        gates.append(phase_gate(control, plan.alpha))
    return gates


def toffoli_network(a: int, b: int, c: int) -> list[Gate]:
    """Toffoli(a, b → c) over {H, T, T†, CNOT}."""
    return [
        h(c), cnot(b, c), tdg_gate(c), cnot(a, c), t_gate(c), cnot(b, c), tdg_gate(c),
        cnot(a, c), t_gate(b), t_gate(c), h(c), cnot(a, b), t_gate(a), tdg_gate(b), cnot(a, b),
    ]


# ── Circuits ──────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Circuit:
    width: int
    layers: tuple[tuple[Gate, ...], ...] = field(default=())

    def __post_init__(self) -> None:
        if int(self.width) < 0:
            raise ContractError(f"circuit width must be ≥ 0, got {self.width}")
        object.__setattr__(self, "width", int(self.width))
        layers = tuple(tuple(layer) for layer in self.layers if len(layer) > 0)
        object.__setattr__(self, "layers", layers)
        for index, layer in enumerate(layers):
            seen: set[int] = set()
            for gate in layer:
                for q in gate.qubits:
                    if q >= self.width:
                        raise ContractError(
                            f"layer {index}: {gate.kind} on qubit {q} exceeds width {self.width}"
                        )
                    if q in seen:
                        raise ContractError(f"layer {index}: qubit {q} used by more than one gate")
                    seen.add(q)

    @classmethod
    def from_gates(cls, width: int, gates: Iterable[Gate]) -> Circuit:
        """Build a circuit with as-soon-as-possible layering of ``gates``."""
        next_free = [0] * int(width)
        layers: list[list[Gate]] = []
        for gate in gates:
            for q in gate.qubits:
                if q >= width:
                    raise ContractError(f"{gate.kind} on qubit {q} exceeds width {width}")
            slot = max(next_free[q] for q in gate.qubits)
            if slot == len(layers):
                layers.append([])
            layers[slot].append(gate)
            for q in gate.qubits:
                next_free[q] = slot + 1
        return cls(width, tuple(tuple(layer) for layer in layers))

    def gates(self) -> list[Gate]:
        return [gate for layer in self.layers for gate in layer]

    @property
    def gate_count(self) -> int:
        return sum(len(layer) for layer in self.layers)

    def then(self, other: Circuit) -> Circuit:
        """This circuit followed by ``other``."""
        return compose(self, other)

    def to_dict(self) -> dict[str, Any]:
        return {
            "width": self.width,
            "layers": [[gate.to_dict() for gate in layer] for layer in self.layers],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Circuit:
        try:
            width = int(data["width"])
            raw_layers = data["layers"]
            layers = []
            for index, layer in enumerate(raw_layers):
                try:
                    layers.append(tuple(Gate.from_dict(g) for g in layer))
                except ContractError as exc:
                    raise ContractError(f"layers[{index}]: {exc}") from exc
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ContractError):
                raise
            raise ContractError(f"malformed circuit JSON: {exc!r}") from exc
        return cls(width, tuple(layers))


def empty(width: int) -> Circuit:
    return Circuit(width, ())


@dataclass(frozen=True)
class GateCostModel:
    """Per-kind depth weights; every cost is a positive integer."""
    default: int = DEFAULT_GATE_COST
    toffoli: int = TOFFOLI_COST
    swap: int = DEFAULT_GATE_COST

    def __post_init__(self) -> None:
        for name in ("default", "toffoli", "swap"):
            if int(getattr(self, name)) < 1:
                raise ContractError(f"gate cost '{name}' must be ≥ 1, got {getattr(self, name)}")

    def cost(self, kind: str) -> int:
        if kind == "Toffoli":
            return self.toffoli
        if kind == "SWAP":
            return self.swap
        return self.default

    @classmethod
    def swap_as_cnots(cls) -> GateCostModel:
        return cls(swap=SWAP_AS_CNOT_COST)

    def to_dict(self) -> dict[str, int]:
        return {"default": self.default, "toffoli": self.toffoli, "swap": self.swap}


DEFAULT_COST_MODEL = GateCostModel()


@dataclass(frozen=True)
class ConnectivityViolation:
    layer: int
    gate: Gate
    pair: tuple[int, int]


# ── Operations ────────────────────────────────────────────────────────────────

def depth(c: Circuit, cost: GateCostModel = DEFAULT_COST_MODEL) -> int:
    """Longest weighted chain of qubit-sharing gates (ASAP schedule)."""
    ready = [0] * c.width
    longest = 0
    for gate in c.gates():
        start = max(ready[q] for q in gate.qubits)
        end = start + cost.cost(gate.kind)
        for q in gate.qubits:
            ready[q] = end
        longest = max(longest, end)
    return longest


def relayer(c: Circuit) -> Circuit:
    return Circuit.from_gates(c.width, c.gates())


def compose(*circuits: Circuit) -> Circuit:
    """Sequential composition, first argument applied first."""
    if not circuits:
        raise ContractError("compose needs at least one circuit")
    width = circuits[0].width
    for other in circuits[1:]:
        if other.width != width:
            raise ContractError(f"cannot compose circuits of widths {width} and {other.width}")
    return Circuit.from_gates(width, [g for c in circuits for g in c.gates()])


def inverse(c: Circuit) -> Circuit:
    return Circuit(c.width, tuple(tuple(g.adjoint() for g in layer) for layer in reversed(c.layers)))


def remap(c: Circuit, mapping: Mapping[int, int] | Sequence[int], width: int) -> Circuit:
    """Relabel qubit q as ``mapping[q]`` inside a register of ``width`` qubits."""
    return Circuit(width, tuple(tuple(g.relabel(mapping) for g in layer) for layer in c.layers))


def expand_swaps(c: Circuit) -> Circuit:
    gates: list[Gate] = []
    for g in c.gates():
        if g.kind == "SWAP":
            a, b = g.qubits
            gates.extend([cnot(a, b), cnot(b, a), cnot(a, b)])
        else:
            gates.append(g)
    return Circuit.from_gates(c.width, gates)


def expand_toffolis(c: Circuit) -> Circuit:
    gates: list[Gate] = []
    for g in c.gates():
        gates.extend(toffoli_network(*g.qubits) if g.kind == "Toffoli" else [g])
    return Circuit.from_gates(c.width, gates)


def to_cnot_basis(c: Circuit) -> Circuit:
    """Rewrite SWAP and Toffoli so only single-qubit gates and CNOTs remain."""
    return expand_toffolis(expand_swaps(c))


def validate_connectivity(c: Circuit, g: ConnectivityGraph) -> list[ConnectivityViolation]:
    if c.width != g.n:
        raise ContractError(f"circuit width {c.width} does not match graph with {g.n} vertices")
    violations = []
    for index, layer in enumerate(c.layers):
        for gate in layer:
            qs = gate.qubits
            for i in range(len(qs)):
                for j in range(i + 1, len(qs)):
                    if not g.has_edge(qs[i], qs[j]):
                        violations.append(ConnectivityViolation(index, gate, (qs[i], qs[j])))
    return violations


def controlled_gate(control: int, gate: Gate, offset: int = 0) -> list[Gate]:
    """Singly-controlled version of one gate, data qubits shifted by ``offset``."""
    qs = tuple(q + offset for q in gate.qubits)
    if gate.kind == "X":
        return [cnot(control, qs[0])]
    if gate.kind == "CNOT":
        return [toffoli(control, *qs)]
    if gate.kind == "SWAP":
        a, b = qs
        return [cnot(b, a), toffoli(control, a, b), cnot(b, a)]
    if gate.kind == "Toffoli":
        out: list[Gate] = []
        for sub in toffoli_network(*qs):
            out.extend(controlled_gate(control, sub))
        return out
    return controlled_single_qubit(control, qs[0], gate.matrix())


def controlled_naive(c: Circuit) -> Circuit:
    """Gate-by-gate controlled circuit on ``c.width + 1`` qubits, control on qubit 0."""
    gates: list[Gate] = []
    for gate in c.gates():
        gates.extend(controlled_gate(0, gate, offset=1))
    return Circuit.from_gates(c.width + 1, gates)


# ── State preparation ─────────────────────────────────────────────────────────

def _popcount(value: int) -> int:
    return bin(value).count("1")


def uniformly_controlled_rotation(
    axis: str, target: int, controls: Sequence[int], angles: np.ndarray,
) -> list[Gate]:
    """Multiplexed rotation: angle ``angles[b]`` when the controls read b.

    Bit j of b is the value of ``controls[j]``. Expanded into alternating
    rotations and CNOTs along a Gray-code walk.
    """
    make = ry if axis == "y" else rz
    angles = np.asarray(angles, dtype=float)
    if np.all(np.abs(angles) < ANGLE_EPSILON):
        return []
    k = len(controls)
    if k == 0:
        return [make(target, float(angles[0]))]
    size = 1 << k
    gray = [i ^ (i >> 1) for i in range(size)]
    signs = np.array([[(-1) ** _popcount(b & g) for g in gray] for b in range(size)], dtype=float)
    thetas = signs.T @ angles / size
    gates: list[Gate] = []
    for i in range(size):
        if abs(thetas[i]) > ANGLE_EPSILON:
            gates.append(make(target, float(thetas[i])))
        changed = gray[i] ^ gray[(i + 1) % size]
        gates.append(cnot(controls[changed.bit_length() - 1], target))
    return gates


def synthesize_state_prep(v, width: int) -> Circuit:
    """Circuit U with ``U|0…0⟩ = v`` built as a binary rotation tree."""
    v = np.asarray(v, dtype=complex).reshape(-1)
    if v.shape[0] != 1 << width:
        raise ContractError(f"vector of length {v.shape[0]} does not fit {width} qubits")
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > UNIT_NORM_TOLERANCE:
        raise ContractError(f"state vector must have unit norm, got {norm:.12g}")
    probs = np.abs(v) ** 2
    gates: list[Gate] = []
    for t in reversed(range(width)):
        k = width - 1 - t
        mass = probs.reshape(1 << k, 2, 1 << t).sum(axis=2)
        angles = 2 * np.arctan2(np.sqrt(mass[:, 1]), np.sqrt(mass[:, 0]))
        gates.extend(uniformly_controlled_rotation("y", t, list(range(t + 1, width)), angles))

    phases = np.where(np.abs(v) > 1e-15, np.angle(v), 0.0)
    for t in range(width):
        pairs = phases.reshape(-1, 2)
        gates.extend(
            uniformly_controlled_rotation("z", t, list(range(t + 1, width)), pairs[:, 1] - pairs[:, 0])
        )
        phases = pairs.mean(axis=1)
    if width > 0 and abs(float(phases[0])) > ANGLE_EPSILON:
        gates.append(global_phase(0, float(phases[0])))
    return Circuit.from_gates(width, gates)

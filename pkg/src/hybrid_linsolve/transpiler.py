"""Depth-optimized controlled circuits on a fully connected register.

Every construction here returns a circuit whose unitary is
``|0⟩⟨0|⊗I + |1⟩⟨1|⊗U`` on the control and data qubits, with any ancilla
qubits returned to their input value. Depths are measured with
:func:`hybrid_linsolve.circuit.depth` under the default cost model
(Toffoli = 8, every other gate = 1).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

from .circuit import (
    DEFAULT_COST_MODEL,
    Circuit,
    ControlledRotationPlan,
    Gate,
    GateCostModel,
    cnot,
    controlled_naive,
    controlled_rotation_plan,
    depth,
    expand_swaps,
    expand_toffolis,
    phase_gate,
    relayer,
    toffoli,
)
from .config import ANGLE_EPSILON, C_LAT, DEFAULT_CONSTRUCTION, VALID_CONSTRUCTIONS, Construction
from .errors import ContractError
from .topology import ConnectivityGraph

logger = logging.getLogger(__name__)

# Halves with at least this many CNOTs use borrowed ancillas instead of
# Toffolis that all share the control.
BORROW_THRESHOLD = 3


def ceil_log2(value: int) -> int:
    """⌈log₂ value⌉ with ⌈log₂ 1⌉ = 0."""
    if value < 1:
        raise ContractError(f"log₂ needs a positive argument, got {value}")
    return (value - 1).bit_length()


# ── Copy and fan-out ──────────────────────────────────────────────────────────

def _difference_round_gates(qubits: Sequence[int]) -> list[Gate]:
    """Bottom-up pass: qubit i + 2^r absorbs qubit i for 1 ≤ i < 2^r."""
    count = len(qubits)
    rounds = ceil_log2(count)
    gates = []
    for r in reversed(range(1, rounds)):
        step = 1 << r
        for i in range(1, step):
            if i + step < count:
                gates.append(cnot(qubits[i], qubits[i + step]))
    return gates


def _doubling_gates(qubits: Sequence[int]) -> list[Gate]:
    """Broadcast pass: round r copies qubits [0, 2^r) onto [2^r, 2^{r+1})."""
    count = len(qubits)
    gates = []
    for r in range(ceil_log2(count)):
        step = 1 << r
        for i in range(step):
            if i + step < count:
                gates.append(cnot(qubits[i], qubits[i + step]))
    return gates


def fanout_gates(source: int, targets: Sequence[int]) -> list[Gate]:
    """CNOTs adding ``source`` into every target, depth 2⌈log₂(k+1)⌉ − 1."""
    if not targets:
        return []
    qubits = [source, *targets]
    return _difference_round_gates(qubits) + _doubling_gates(qubits)


def copy_circuit(n: int) -> Circuit:
    """CNOT circuit mapping (x₀, x₁, …) to (x₀, x₀⊕x₁, …, x₀⊕x_{n−1})."""
    if n < 2:
        raise ContractError(f"copy circuit needs n ≥ 2, got {n}")
    return Circuit.from_gates(n, fanout_gates(0, list(range(1, n))))


def zero_fanout(n: int) -> Circuit:
    """Copy qubit 0 onto qubits 1..n−1 assuming they start in |0⟩; depth ⌈log₂ n⌉."""
    if n < 1:
        raise ContractError(f"fan-out needs n ≥ 1, got {n}")
    return Circuit.from_gates(n, _doubling_gates(list(range(n))))


# ── One controlled layer ──────────────────────────────────────────────────────

def split_cnot_halves(cnots: Sequence[Gate]) -> tuple[list[Gate], list[Gate]]:
    """Sort by control index and split so the first half has ⌈s/2⌉ gates."""
    ordered = sorted(cnots, key=lambda g: g.qubits)
    half = (len(ordered) + 1) // 2
    return ordered[:half], ordered[half:]


def borrow_ancillas(half: Sequence[Gate], donors: Sequence[Gate]) -> list[int]:
    pool = [q for g in donors for q in g.qubits]
    if len(pool) < len(half):
        raise ContractError(f"{len(half)} borrowed ancillas requested but only {len(pool)} available")
    return pool[: len(half)]


def _direct_toffolis(half: Sequence[Gate], control: int) -> list[Gate]:
    return [toffoli(control, *g.qubits) for g in half]


def _borrowed_toffolis(half: Sequence[Gate], ancillas: Sequence[int], control: int) -> list[Gate]:
    batch = [toffoli(b, *g.qubits) for b, g in zip(ancillas, half)]
    fanout = fanout_gates(control, list(ancillas))
    return batch + fanout + batch + fanout


def rotation_plans(gates: Sequence[Gate]) -> tuple[list[int], list[ControlledRotationPlan]]:
    flips = [g.qubits[0] for g in gates if g.kind == "X"]
    plans = [
        controlled_rotation_plan(g.qubits[0], g.matrix())
        for g in gates if g.is_single_qubit and g.kind != "X"
    ]
    return flips, plans


def phase_on_control(plans: Sequence[ControlledRotationPlan], control: int) -> list[Gate]:
    alpha = sum(p.alpha for p in plans)
    return [phase_gate(control, alpha)] if abs(alpha) > ANGLE_EPSILON else []


def control_layer_gates(gates: Sequence[Gate], control: int) -> list[Gate]:
    """Controlled version of one layer of disjoint CNOTs and single-qubit gates.

    Borrowed ancillas for each CNOT half come from the other half, so nothing
    outside the layer's own qubits and ``control`` is touched.
    """
    for g in gates:
        if g.kind in ("SWAP", "Toffoli"):
            raise ContractError(f"{g.kind} must be expanded before controlling a layer")
    first, second = split_cnot_halves([g for g in gates if g.kind == "CNOT"])
    flips, plans = rotation_plans(gates)
    crossing = [p.target for p in plans if p.needs_cnots]
    before = [p.before for p in plans if p.before is not None]
    middle = [p.middle for p in plans if p.middle is not None]
    after = [p.after for p in plans if p.after is not None]

    out: list[Gate] = []
    if len(first) >= BORROW_THRESHOLD:
        # the control fan-outs for the borrowed ancillas also carry the
        # rotation CNOTs
        ancillas = borrow_ancillas(first, second)
        batch = [toffoli(b, *g.qubits) for b, g in zip(ancillas, first)]
        out += batch + before
        out += fanout_gates(control, ancillas + flips + crossing)
        out += batch + middle
        out += fanout_gates(control, ancillas + crossing)
    else:
        out += _direct_toffolis(first, control)
        out += before
        out += fanout_gates(control, flips + crossing)
        out += middle
        out += fanout_gates(control, crossing)
    out += after + phase_on_control(plans, control)

    if len(second) >= BORROW_THRESHOLD:
        out += _borrowed_toffolis(second, borrow_ancillas(second, first), control)
    else:
        out += _direct_toffolis(second, control)
    return out


def _check_single_layer(layer: Circuit) -> None:
    if len(relayer(layer).layers) > 1:
        raise ContractError(f"expected a depth-1 circuit, got {len(relayer(layer).layers)} layers")


def control_one_layer(layer: Circuit) -> Circuit:
    """Controlled depth-1 circuit on ``width + 1`` qubits, control on qubit 0."""
    _check_single_layer(layer)
    shifted = [g.relabel(range(1, layer.width + 1)) for g in layer.gates()]
    return Circuit.from_gates(layer.width + 1, control_layer_gates(shifted, 0))


# ── s control copies ──────────────────────────────────────────────────────────

def _pack_groups(gates: Sequence[Gate], capacity: int) -> list[list[Gate]]:
    """Greedy packing into groups of at most ``capacity`` qubits, CNOTs first."""
    ordered = [g for g in gates if len(g.qubits) > 1] + [g for g in gates if len(g.qubits) == 1]
    groups: list[list[Gate]] = []
    used = 0
    for gate in ordered:
        size = len(gate.qubits)
        if not groups or (used + size > capacity and used > 0):
            groups.append([])
            used = 0
        groups[-1].append(gate)
        used += size
    return groups


def prepare_for_control(c: Circuit) -> Circuit:
    """Rewrite SWAP and Toffoli into CNOTs and single-qubit gates, then relayer."""
    return relayer(expand_toffolis(expand_swaps(c)))


def control_with_ancillas(c: Circuit, s: int) -> Circuit:
    """Controlled-U on ``n + s`` qubits using ``s − 1`` zero-initialized ancillas.

    Qubit 0 is the control, qubits 1..s−1 the ancillas and qubits s..s+n−1
    the data. The control is copied onto the ancillas, each layer is split
    into at most s groups controlled in parallel by separate copies, and the
    copy is undone at the end.
    """
    n = c.width
    if not 1 <= s <= max(n, 1):
        raise ContractError(f"ancilla count s must satisfy 1 ≤ s ≤ n = {n}, got {s}")
    source = prepare_for_control(c)
    width = n + s
    capacity = 1 << ceil_log2(-(-n // s)) if n else 1
    copy = _doubling_gates(list(range(s)))
    gates: list[Gate] = list(copy)
    for layer in source.layers:
        shifted = [g.relabel(range(s, s + n)) for g in layer]
        groups = _pack_groups(shifted, capacity)
        if len(groups) > s:
            raise ContractError(f"layer needs {len(groups)} control copies but only {s} exist")
        for copy_qubit, group in enumerate(groups):
            gates += control_layer_gates(group, copy_qubit)
    gates += [g.adjoint() for g in reversed(copy)]
    logger.debug("controlled %d layers with %d copies (group capacity %d)", len(source.layers), s, capacity)
    return Circuit.from_gates(width, gates)


# ── Construction choice ───────────────────────────────────────────────────────

@dataclass(frozen=True)
class ControlStrategy:
    """Which controlled-circuit construction to use and its size parameters."""
    kind: Construction = DEFAULT_CONSTRUCTION
    ancillas: int = 1
    l1: int = 0
    l2: int = 0

    def __post_init__(self) -> None:
        if self.kind not in VALID_CONSTRUCTIONS:
            raise ContractError(
                f"unknown construction '{self.kind}'. Valid values: {', '.join(sorted(VALID_CONSTRUCTIONS))}"
            )
        if self.kind == "ancilla" and self.ancillas < 1:
            raise ContractError(f"ancilla construction needs s ≥ 1, got {self.ancillas}")
        if self.kind == "lattice" and (self.l1 < 1 or self.l2 < 1):
            raise ContractError(f"lattice dimensions must be ≥ 1, got {self.l1}×{self.l2}")

    @classmethod
    def naive(cls) -> ControlStrategy:
        return cls("naive")

    @classmethod
    def with_ancillas(cls, s: int) -> ControlStrategy:
        return cls("ancilla", ancillas=s)

    @classmethod
    def lattice(cls, l1: int, l2: int) -> ControlStrategy:
        return cls("lattice", l1=l1, l2=l2)

    @classmethod
    def path(cls, n: int) -> ControlStrategy:
        return cls("lattice", l1=n, l2=1)

    def describe(self) -> str:
        if self.kind == "ancilla":
            return f"ancilla(s={self.ancillas})"
        if self.kind == "lattice":
            return f"lattice({self.l1}×{self.l2})"
        return "naive"

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind}
        if self.kind == "ancilla":
            out["ancillas"] = self.ancillas
        if self.kind == "lattice":
            out.update(l1=self.l1, l2=self.l2)
        return out


@dataclass(frozen=True)
class ControlledCircuit:
    circuit: Circuit
    control: int
    data: tuple[int, ...]
    ancillas: tuple[int, ...]
    connectivity: ConnectivityGraph
    strategy: ControlStrategy
    source_width: int
    source_layers: int


def control_circuit(c: Circuit, strategy: ControlStrategy = ControlStrategy()) -> ControlledCircuit:
    n = c.width
    if strategy.kind == "naive":
        return ControlledCircuit(
            circuit=controlled_naive(c),
            control=0,
            data=tuple(range(1, n + 1)),
            ancillas=(),
            connectivity=ConnectivityGraph.complete(n + 1),
            strategy=strategy,
            source_width=n,
            source_layers=len(relayer(c).layers),
        )
    if strategy.kind == "ancilla":
        s = strategy.ancillas
        return ControlledCircuit(
            circuit=control_with_ancillas(c, s),
            control=0,
            data=tuple(range(s, s + n)),
            ancillas=tuple(range(1, s)),
            connectivity=ConnectivityGraph.complete(n + s),
            strategy=strategy,
            source_width=n,
            source_layers=len(prepare_for_control(c).layers),
        )
    from .lattice import control_circuit_on_lattice

    l1, l2 = strategy.l1, strategy.l2
    return ControlledCircuit(
        circuit=control_circuit_on_lattice(c, l1, l2),
        control=0,
        data=tuple(range(1, n + 1)),
        ancillas=tuple(range(n + 1, l1 * l2)),
        connectivity=ConnectivityGraph.lattice(l1, l2),
        strategy=strategy,
        source_width=n,
        source_layers=len(prepare_for_control(c).layers),
    )


# ── Depth reporting ───────────────────────────────────────────────────────────

@dataclass(frozen=True)
class DepthReport:
    measured_depth: int
    bound_formula: str
    bound_value: int
    bound_applies: bool
    lower_bound: int
    cost_model: GateCostModel
    connectivity: ConnectivityGraph
    notes: dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "measured_depth": self.measured_depth,
            "bound_formula": self.bound_formula,
            "bound_value": self.bound_value,
            "bound_applies": self.bound_applies,
            "lower_bound": self.lower_bound,
            "cost_model": self.cost_model.to_dict(),
            "connectivity": self.connectivity.to_dict(),
            "notes": dict(self.notes),
        }


def depth_lower_bound(n: int, g: ConnectivityGraph) -> int:
    """max(⌈log₂ n⌉, diameter) floor for a Hadamard test on n qubits."""
    return max(ceil_log2(max(n, 1)), g.diameter())


def light_cone_lower_bound(
    c: Circuit,
    g: ConnectivityGraph,
    measured: int = 0,
    cost: GateCostModel = DEFAULT_COST_MODEL,
) -> int:
    """Depth floor from the backward light cone of ``measured``.

    A gate on ``a`` qubits costing ``w`` depth units multiplies the cone by
    at most ``a`` and carries it at most its graph span, so with
    r = max a^(1/w) and v = max span/w over the gates,
    depth ≥ max(⌈log_r k⌉, ⌈e / v⌉) for k qubits in the cone whose farthest
    member is e edges away. Under the default costs this is
    max(⌈log₂ k⌉, e).
    """
    cone = {measured}
    growth, speed = 1.0, 0.0
    rows: dict[int, dict[int, int]] = {}

    def _distance(p: int, q: int) -> int:
        if p not in rows:
            rows[p] = g.distances_from(p)
        return rows[p].get(q, g.n)

    for gate in reversed(c.gates()):
        if not cone.intersection(gate.qubits) or len(gate.qubits) < 2:
            continue
        cone.update(gate.qubits)
        weight = cost.cost(gate.kind)
        growth = max(growth, len(gate.qubits) ** (1.0 / weight))
        span = max(_distance(p, q) for p in gate.qubits for q in gate.qubits)
        speed = max(speed, span / weight)
    distances = g.distances_from(measured)
    farthest = max((distances.get(q, 0) for q in cone), default=0)
    size_term = 0 if len(cone) == 1 else math.ceil(math.log(len(cone)) / math.log(growth) - 1e-9)
    reach_term = 0 if farthest == 0 else math.ceil(farthest / speed - 1e-9)
    return max(size_term, reach_term)


def _bound(controlled: ControlledCircuit, cost: GateCostModel) -> tuple[str, int, bool]:
    strategy = controlled.strategy
    d = controlled.source_layers
    n = controlled.source_width
    default_costs = cost == DEFAULT_COST_MODEL
    if strategy.kind == "ancilla":
        s = strategy.ancillas
        value = 2 * ceil_log2(s) + 12 * d * ceil_log2(-(-max(n, 1) // s)) + 9 * d
        return "2⌈log₂ s⌉ + 12d⌈log₂(n/s)⌉ + 9d", value, default_costs
    if strategy.kind == "lattice":
        value = C_LAT * d * (strategy.l1 + strategy.l2)
        return "C_lat·d·(l1+l2)", value, cost.default == 1 and cost.swap == 1
    total = sum(cost.cost(g.kind) for g in controlled.circuit.gates())
    return "Σ gate costs (every gate on the control)", total, True


def depth_report(
    controlled: ControlledCircuit,
    circuit: Circuit | None = None,
    cost: GateCostModel = DEFAULT_COST_MODEL,
    overhead: int = 0,
    notes: dict[str, str] | None = None,
) -> DepthReport:
    """Depth, closed-form bound and light-cone floor for ``circuit``.

    ``circuit`` defaults to the controlled circuit itself; a Hadamard test
    passes its full circuit and the number of extra single-qubit layers on
    the control as ``overhead``.
    """
    target = circuit if circuit is not None else controlled.circuit
    formula, value, applies = _bound(controlled, cost)
    if overhead:
        formula, value = f"{formula} + {overhead}", value + overhead
    measured = depth(target, cost)
    report = DepthReport(
        measured_depth=measured,
        bound_formula=formula,
        bound_value=value,
        bound_applies=applies,
        lower_bound=light_cone_lower_bound(target, controlled.connectivity, controlled.control, cost),
        cost_model=cost,
        connectivity=controlled.connectivity,
        notes={"construction": controlled.strategy.describe(), **(notes or {})},
    )
    if applies and measured > value:
        logger.warning("measured depth %d exceeds bound %s = %d", measured, formula, value)
    return report

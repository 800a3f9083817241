"""Controlled circuits on a 2-D nearest-neighbour lattice.

Qubits are lattice cells addressed by their snakelike label (see
:mod:`hybrid_linsolve.topology`), so consecutive labels are always
neighbours. Every circuit produced here passes ``validate_connectivity``
against ``ConnectivityGraph.lattice(l1, l2)``. A path of n qubits is the
n×1 lattice.
"""
from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Sequence

import networkx as nx

from .circuit import Circuit, Gate, cnot, compose, inverse, relayer, swap, toffoli_network
from .errors import ContractError
from .topology import snake_index, snake_position
from .transpiler import phase_on_control, prepare_for_control, rotation_plans, split_cnot_halves

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PermutationSpec:
    """Token on vertex i moves to vertex ``targets[i]``."""
    n: int
    targets: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if len(self.targets) != self.n or sorted(self.targets) != list(range(self.n)):
            raise ContractError(f"targets must be a permutation of 0..{self.n - 1}, got {list(self.targets)}")

    @classmethod
    def identity(cls, n: int) -> PermutationSpec:
        return cls(n, tuple(range(n)))

    def inverse(self) -> PermutationSpec:
        back = [0] * self.n
        for source, target in enumerate(self.targets):
            back[target] = source
        return PermutationSpec(self.n, tuple(back))

    def to_dict(self) -> dict[str, Any]:
        return {"n": self.n, "targets": list(self.targets)}


def _check_dims(l1: int, l2: int) -> int:
    if l1 < 1 or l2 < 1:
        raise ContractError(f"lattice dimensions must be ≥ 1, got {l1}×{l2}")
    return l1 * l2


def snakelike_labeling(l1: int, l2: int) -> PermutationSpec:
    """Row-major cell index (row·l2 + col) → snakelike label."""
    _check_dims(l1, l2)
    return PermutationSpec(
        l1 * l2, tuple(snake_index(row, col, l2) for row in range(l1) for col in range(l2))
    )


# ── Permutation routing ───────────────────────────────────────────────────────

def _transposition_sort(
    lines: Sequence[Sequence[int]], token_at: list[int], key: Callable[[int], int],
) -> list[Gate]:
    """Odd-even transposition sort of the tokens on every line, in parallel."""
    gates: list[Gate] = []
    longest = max(len(line) for line in lines)
    for rnd in range(longest):
        for line in lines:
            for i in range(rnd % 2, len(line) - 1, 2):
                a, b = line[i], line[i + 1]
                if key(token_at[a]) > key(token_at[b]):
                    token_at[a], token_at[b] = token_at[b], token_at[a]
                    gates.append(swap(a, b))
    return gates


def _row_assignment(targets: Sequence[int], l1: int, l2: int) -> dict[int, int]:
    """Give every token a row so each row holds one token per destination column.

    The source-column/destination-column multigraph is l1-regular, so it
    splits into l1 perfect matchings; matching r is sent to row r.
    """
    buckets: dict[tuple[int, int], list[int]] = defaultdict(list)
    for row in range(l1):
        for col in range(l2):
            token = snake_index(row, col, l2)
            buckets[(col, snake_position(targets[token], l2)[1])].append(token)
    left = [("src", col) for col in range(l2)]
    assignment: dict[int, int] = {}
    for row in range(l1):
        graph = nx.Graph()
        graph.add_nodes_from(left)
        graph.add_nodes_from(("dst", col) for col in range(l2))
        graph.add_edges_from((("src", a), ("dst", b)) for (a, b), tokens in buckets.items() if tokens)
        matching = nx.bipartite.hopcroft_karp_matching(graph, top_nodes=left)
        for node in left:
            _, dest_col = matching[node]
            assignment[buckets[(node[1], dest_col)].pop(0)] = row
    return assignment


def route_permutation_lattice(p: PermutationSpec, l1: int, l2: int) -> Circuit:
    """SWAP circuit moving the qubit on vertex i to vertex ``p.targets[i]``.

    Three phases of odd-even transposition sorting: within columns to the
    assigned rows, within rows to the destination columns, then within
    columns to the destination rows. At most 2·l1 + l2 SWAP layers.
    """
    n = _check_dims(l1, l2)
    if p.n != n:
        raise ContractError(f"permutation on {p.n} vertices does not fit a {l1}×{l2} lattice")
    columns = [[snake_index(row, col, l2) for row in range(l1)] for col in range(l2)]
    rows = [[snake_index(row, col, l2) for col in range(l2)] for row in range(l1)]
    token_at = list(range(n))
    assigned = _row_assignment(p.targets, l1, l2)

    gates = _transposition_sort(columns, token_at, lambda t: assigned[t])
    gates += _transposition_sort(rows, token_at, lambda t: snake_position(p.targets[t], l2)[1])
    gates += _transposition_sort(columns, token_at, lambda t: snake_position(p.targets[t], l2)[0])
    if any(p.targets[token] != vertex for vertex, token in enumerate(token_at)):
        raise AssertionError("permutation routing did not reach its targets")
    logger.debug("routed permutation on %d×%d with %d SWAPs", l1, l2, len(gates))
    return Circuit.from_gates(n, gates)


# ── One CNOT layer ────────────────────────────────────────────────────────────

def _adjacent(a: int, b: int, l2: int) -> bool:
    (ra, ca), (rb, cb) = snake_position(a, l2), snake_position(b, l2)
    return abs(ra - rb) + abs(ca - cb) == 1


def map_one_layer_cnots_to_lattice(layer: Circuit, l1: int, l2: int) -> Circuit:
    """Route every CNOT pair next to each other, apply the layer, route back."""
    n = _check_dims(l1, l2)
    if layer.width != n:
        raise ContractError(f"layer width {layer.width} does not match a {l1}×{l2} lattice")
    gates = layer.gates()
    for g in gates:
        if g.kind != "CNOT":
            raise ContractError(f"expected only CNOT gates, found {g.kind}")
    if len(relayer(layer).layers) > 1:
        raise ContractError("expected a single layer of disjoint CNOTs")
    if all(_adjacent(*g.qubits, l2) for g in gates):
        return Circuit.from_gates(n, gates)

    paired = {q for g in gates for q in g.qubits}
    units = [g.qubits for g in gates] + [(q,) for q in range(n) if q not in paired]
    units.sort(key=min)
    targets = [0] * n
    position = 0
    for unit in units:
        for q in unit:
            targets[q] = position
            position += 1
    route = route_permutation_lattice(PermutationSpec(n, tuple(targets)), l1, l2)
    moved = Circuit.from_gates(n, [cnot(targets[c], targets[t]) for c, t in (g.qubits for g in gates)])
    return compose(route, moved, inverse(route))


# ── Fan-out on a spanning tree ────────────────────────────────────────────────

def _comb_tree(root: int, keep: set[int], l1: int, l2: int) -> nx.Graph:
    """All horizontal edges plus the vertical edges in the root's column,
    with leaves outside ``keep`` pruned away."""
    spine = snake_position(root, l2)[1]
    tree = nx.Graph()
    tree.add_nodes_from(range(l1 * l2))
    for row in range(l1):
        tree.add_edges_from(
            (snake_index(row, col, l2), snake_index(row, col + 1, l2)) for col in range(l2 - 1)
        )
    tree.add_edges_from(
        (snake_index(row, spine, l2), snake_index(row + 1, spine, l2)) for row in range(l1 - 1)
    )
    leaves = [v for v in tree if tree.degree(v) <= 1 and v not in keep]
    while leaves:
        v = leaves.pop()
        if v not in tree:
            continue
        neighbours = list(tree.neighbors(v))
        tree.remove_node(v)
        leaves += [u for u in neighbours if tree.degree(u) <= 1 and u not in keep]
    return tree


def _transfer(
    source: int, inner: list[int], boundary: list[int], parent: dict[int, int], level: dict[int, int],
) -> list[Gate]:
    """Add ``source`` into every boundary node; inner nodes end unchanged.

    A prefix pass leaves each node holding the XOR of its path from the
    source; undoing it on the inner nodes restores them. The same pair of
    passes without the source's own edges then cancels the inner-node terms
    left on the boundary.
    """
    down = sorted(inner + boundary, key=lambda u: (level[u], u))
    up = sorted(inner, key=lambda u: (-level[u], u))
    gates = [cnot(parent[u], u) for u in down]
    gates += [cnot(parent[u], u) for u in up]
    gates += [cnot(parent[u], u) for u in down if parent[u] != source]
    gates += [cnot(parent[u], u) for u in up if parent[u] != source]
    return gates


def fanout_gates_on_lattice(control: int, targets: Iterable[int], l1: int, l2: int) -> list[Gate]:
    n = _check_dims(l1, l2)
    wanted = set(int(t) for t in targets)
    if not 0 <= control < n:
        raise ContractError(f"control {control} is not a cell of a {l1}×{l2} lattice")
    bad = sorted(t for t in wanted if not 0 <= t < n)
    if bad:
        raise ContractError(f"targets {bad} are not cells of a {l1}×{l2} lattice")
    if control in wanted:
        raise ContractError(f"control {control} cannot also be a target")
    if not wanted:
        return []

    tree = _comb_tree(control, wanted | {control}, l1, l2)
    parent = dict(nx.bfs_predecessors(tree, control))
    level = nx.single_source_shortest_path_length(tree, control)
    children: dict[int, list[int]] = defaultdict(list)
    for child, up in parent.items():
        children[up].append(child)

    segments: dict[int, tuple[list[int], list[int]]] = {}
    for v in wanted | {control}:
        inner, boundary = [], []
        stack = list(children[v])
        while stack:
            u = stack.pop()
            if u in wanted:
                boundary.append(u)
            else:
                inner.append(u)
                stack.extend(children[u])
        segments[v] = (inner, boundary)

    # deepest segments first: each segment's boundary absorbs its source
    # before that source is itself modified
    gates: list[Gate] = []
    for v in sorted(segments, key=lambda u: (-level[u], u)):
        gates += _transfer(v, *segments[v], parent, level)
    for v in sorted(wanted, key=lambda u: (level[u], u)):
        gates += _transfer(v, *segments[v], parent, level)
    return gates


def fanout_on_lattice(control: int, targets: Iterable[int], l1: int, l2: int) -> Circuit:
    """CNOT circuit adding the control's bit into every target cell."""
    return Circuit.from_gates(l1 * l2, fanout_gates_on_lattice(control, targets, l1, l2))


# ── Controlled circuits ───────────────────────────────────────────────────────

def path_toffoli(a: int, middle: int, target: int) -> list[Gate]:
    """Toffoli(a, middle → target) for three consecutive cells of a path."""
    gates: list[Gate] = []
    for g in toffoli_network(a, middle, target):
        if g.kind == "CNOT" and g.qubits == (a, target):
            gates += [cnot(middle, target), cnot(a, middle), cnot(middle, target), cnot(a, middle)]
        else:
            gates.append(g)
    return gates


def _routed_toffolis(triples: Sequence[tuple[int, int, int]], l1: int, l2: int) -> list[Gate]:
    """Move triple k onto snake cells 3k..3k+2, apply the Toffolis, move back."""
    n = l1 * l2
    targets = [-1] * n
    for k, triple in enumerate(triples):
        for offset, q in enumerate(triple):
            targets[q] = 3 * k + offset
    free = iter(range(3 * len(triples), n))
    for q in range(n):
        if targets[q] < 0:
            targets[q] = next(free)
    route = route_permutation_lattice(PermutationSpec(n, tuple(targets)), l1, l2)
    body = [g for k in range(len(triples)) for g in path_toffoli(3 * k, 3 * k + 1, 3 * k + 2)]
    return route.gates() + body + inverse(route).gates()


def _controlled_cnots(half: Sequence[Gate], control: int, l1: int, l2: int) -> list[Gate]:
    if not half:
        return []
    busy = {control} | {q for g in half for q in g.qubits}
    pool = [v for v in range(l1 * l2) if v not in busy]
    if len(half) == 1 or len(pool) < len(half):
        return [g for c in half for g in _routed_toffolis([(control, *c.qubits)], l1, l2)]
    ancillas = pool[: len(half)]
    batch = _routed_toffolis([(b, *g.qubits) for b, g in zip(ancillas, half)], l1, l2)
    fanout = fanout_gates_on_lattice(control, ancillas, l1, l2)
    return batch + fanout + batch + fanout


def _controlled_layer_on_lattice(gates: Sequence[Gate], control: int, l1: int, l2: int) -> list[Gate]:
    first, second = split_cnot_halves([g for g in gates if g.kind == "CNOT"])
    flips, plans = rotation_plans(gates)
    crossing = [p.target for p in plans if p.needs_cnots]
    out = _controlled_cnots(first, control, l1, l2) + _controlled_cnots(second, control, l1, l2)
    out += [p.before for p in plans if p.before is not None]
    out += fanout_gates_on_lattice(control, flips + crossing, l1, l2)
    out += [p.middle for p in plans if p.middle is not None]
    out += fanout_gates_on_lattice(control, crossing, l1, l2)
    out += [p.after for p in plans if p.after is not None]
    return out + phase_on_control(plans, control)


def control_circuit_on_lattice(c: Circuit, l1: int, l2: int) -> Circuit:
    """Connectivity-valid controlled-U on an l1×l2 lattice.

    The control sits on cell 0 and data qubit j on cell j + 1; unused cells
    are borrowed as ancillas and restored.
    """
    n = _check_dims(l1, l2)
    if c.width > n - 1:
        raise ContractError(f"{c.width} data qubits plus a control do not fit a {l1}×{l2} lattice")
    source = prepare_for_control(c)
    gates: list[Gate] = []
    for layer in source.layers:
        shifted = [g.relabel(range(1, c.width + 1)) for g in layer]
        gates += _controlled_layer_on_lattice(shifted, 0, l1, l2)
    logger.debug("controlled %d layers on a %d×%d lattice", len(source.layers), l1, l2)
    return Circuit.from_gates(n, gates)

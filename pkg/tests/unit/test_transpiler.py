"""Unit tests for transpiler.py — copy circuits and depth-optimized control."""
import numpy as np
import pytest

from hybrid_linsolve.circuit import (
    Circuit,
    GateCostModel,
    cnot,
    controlled_naive,
    depth,
    global_phase,
    h,
    remap,
    rotation,
    s,
    sdg,
    swap,
    toffoli,
    x,
)
from hybrid_linsolve.errors import ContractError
from hybrid_linsolve.simulator import StateVector, apply, apply_classical, unitary_of
from hybrid_linsolve.topology import ConnectivityGraph
from hybrid_linsolve.transpiler import (
    ControlStrategy,
    borrow_ancillas,
    ceil_log2,
    control_circuit,
    control_one_layer,
    control_with_ancillas,
    copy_circuit,
    depth_lower_bound,
    depth_report,
    fanout_gates,
    light_cone_lower_bound,
    prepare_for_control,
    split_cnot_halves,
    zero_fanout,
)

UNIT_COSTS = GateCostModel(toffoli=1)


def _controlled_reference(u: np.ndarray) -> np.ndarray:
    dim = u.shape[0]
    out = np.zeros((2 * dim, 2 * dim), dtype=complex)
    out[0::2, 0::2] = np.eye(dim)
    out[1::2, 1::2] = u
    return out


def _random_single(q: int, rng: np.random.Generator):
    kind = int(rng.integers(0, 5))
    if kind == 0:
        return h(q)
    if kind == 1:
        return s(q)
    if kind == 2:
        return sdg(q)
    if kind == 3:
        return x(q)
    axis = rng.normal(size=3)
    return rotation(q, float(rng.uniform(-3, 3)), axis / np.linalg.norm(axis), float(rng.uniform(-1, 1)))


def _random_layer_gates(n: int, rng: np.random.Generator, extra: bool = False) -> list:
    """Disjoint gates on n qubits; ``extra`` also allows SWAP and Toffoli."""
    order = [int(q) for q in rng.permutation(n)]
    gates = []
    while order:
        roll = rng.random()
        if extra and roll < 0.15 and len(order) >= 3:
            gates.append(toffoli(order.pop(), order.pop(), order.pop()))
        elif extra and roll < 0.25 and len(order) >= 2:
            gates.append(swap(order.pop(), order.pop()))
        elif roll < 0.6 and len(order) >= 2:
            gates.append(cnot(order.pop(), order.pop()))
        elif roll < 0.9:
            gates.append(_random_single(order.pop(), rng))
        else:
            order.pop()
    return gates


def _random_circuit(n: int, d: int, seed: int, extra: bool = True) -> Circuit:
    rng = np.random.default_rng(seed)
    gates = []
    for _ in range(d):
        gates += _random_layer_gates(n, rng, extra)
    return Circuit.from_gates(n, gates)


def _random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


class TestCeilLog2:
    @pytest.mark.parametrize("value,expected", [(1, 0), (2, 1), (3, 2), (4, 2), (5, 3), (64, 6), (65, 7)])
    def test_values(self, value, expected):
        assert ceil_log2(value) == expected

    def test_zero_rejected(self):
        with pytest.raises(ContractError):
            ceil_log2(0)


class TestCopyCircuit:
    @pytest.mark.parametrize("n", range(2, 65))
    def test_depth(self, n):
        measured = depth(copy_circuit(n))
        expected = 2 * ceil_log2(n) - 1
        assert measured <= expected
        if not (n >= 3 and ((n - 1) & (n - 2)) == 0):
            assert measured == expected

    @pytest.mark.parametrize("n", range(2, 9))
    def test_exhaustive_basis_map(self, n):
        c = copy_circuit(n)
        for bits in range(1 << n):
            x0 = bits & 1
            expected = bits ^ (((1 << n) - 2) if x0 else 0)
            assert apply_classical(c, bits) == expected

    def test_needs_two_qubits(self):
        with pytest.raises(ContractError):
            copy_circuit(1)

    @pytest.mark.parametrize("n", [1, 2, 5, 8, 9])
    def test_zero_fanout(self, n):
        c = zero_fanout(n)
        assert depth(c) == ceil_log2(n)
        assert apply_classical(c, 1) == (1 << n) - 1
        assert apply_classical(c, 0) == 0

    def test_fanout_gates_empty(self):
        assert fanout_gates(0, []) == []


class TestHalves:
    def test_split_sorted(self):
        first, second = split_cnot_halves([cnot(4, 5), cnot(0, 1), cnot(2, 3)])
        assert first == [cnot(0, 1), cnot(2, 3)]
        assert second == [cnot(4, 5)]

    def test_borrow_needs_enough_qubits(self):
        with pytest.raises(ContractError):
            borrow_ancillas([cnot(0, 1), cnot(2, 3), cnot(4, 5)], [cnot(6, 7)])


class TestControlOneLayer:
    @pytest.mark.parametrize("trial", range(200))
    def test_random_layer(self, trial):
        rng = np.random.default_rng(1000 + trial)
        n = int(rng.integers(2, 17))
        layer = Circuit.from_gates(n, _random_layer_gates(n, rng))
        controlled = control_one_layer(layer)
        assert depth(controlled) <= 12 * ceil_log2(n) + 9
        if n <= 6:
            np.testing.assert_allclose(
                unitary_of(controlled), _controlled_reference(unitary_of(layer)), atol=1e-8,
            )

    @pytest.mark.parametrize("n", [12, 14, 16])
    def test_borrowed_halves_on_random_state(self, n):
        rng = np.random.default_rng(n)
        layer = Circuit.from_gates(n, [cnot(2 * i, 2 * i + 1) for i in range(n // 2)])
        psi = _random_state(1 << (n + 1), rng)
        expected = apply(remap(controlled_naive(layer), list(range(n + 1)), n + 1), StateVector(psi))
        got = apply(control_one_layer(layer), StateVector(psi))
        np.testing.assert_allclose(got.amplitudes, expected.amplitudes, atol=1e-8)

    @pytest.mark.parametrize("n", range(2, 65))
    def test_depth_bound_up_to_64(self, n):
        for seed in range(3):
            rng = np.random.default_rng(7000 + 100 * n + seed)
            layer = Circuit.from_gates(n, _random_layer_gates(n, rng))
            assert depth(control_one_layer(layer)) <= 12 * ceil_log2(n) + 9

    def test_all_cnots_at_64(self):
        layer = Circuit.from_gates(64, [cnot(2 * i, 2 * i + 1) for i in range(32)])
        assert depth(control_one_layer(layer)) <= 12 * ceil_log2(64) + 9

    def test_rejects_deep_circuit(self):
        with pytest.raises(ContractError):
            control_one_layer(Circuit.from_gates(1, [h(0), h(0)]))

    def test_rejects_unexpanded_toffoli(self):
        with pytest.raises(ContractError):
            control_one_layer(Circuit.from_gates(3, [toffoli(0, 1, 2)]))


def _embed_with_ancillas(psi: np.ndarray, n: int, s: int) -> np.ndarray:
    """Map a (control, data) state into the (control, ancillas, data) register."""
    full = np.zeros(1 << (n + s), dtype=complex)
    for index, amp in enumerate(psi):
        full[(index & 1) | ((index >> 1) << s)] = amp
    return full


class TestControlWithAncillas:
    @pytest.mark.parametrize("trial", range(40))
    def test_random(self, trial):
        rng = np.random.default_rng(trial)
        n = int(rng.integers(1, 7))
        d = int(rng.integers(1, 4))
        s_count = int(rng.integers(1, n + 1))
        c = _random_circuit(n, d, seed=trial)
        controlled = control_with_ancillas(c, s_count)
        width = n + s_count
        assert controlled.width == width

        psi = _embed_with_ancillas(_random_state(1 << (n + 1), rng), n, s_count)
        reference = remap(controlled_naive(c), [0] + [s_count + j for j in range(n)], width)
        got = apply(controlled, StateVector(psi)).amplitudes
        np.testing.assert_allclose(got, apply(reference, StateVector(psi)).amplitudes, atol=1e-8)

        d_prepared = len(prepare_for_control(c).layers)
        bound = 2 * ceil_log2(s_count) + 12 * d_prepared * ceil_log2(-(-n // s_count)) + 9 * d_prepared
        assert depth(controlled) <= bound

    @pytest.mark.parametrize("trial", range(60))
    def test_depth_bound_up_to_64(self, trial):
        rng = np.random.default_rng(5000 + trial)
        n = int(rng.integers(2, 65))
        d = int(rng.integers(1, 5))
        s_count = (1, n, int(rng.integers(1, n + 1)))[trial % 3]
        c = _random_circuit(n, d, seed=5000 + trial)
        d_prepared = len(prepare_for_control(c).layers)
        bound = 2 * ceil_log2(s_count) + 12 * d_prepared * ceil_log2(-(-n // s_count)) + 9 * d_prepared
        assert depth(control_with_ancillas(c, s_count)) <= bound

    @pytest.mark.parametrize("n", [4, 5, 8, 13, 16, 32, 33, 64])
    def test_phase_product_within_three_log_n(self, n):
        c = Circuit.from_gates(n, [global_phase(q, 0.3 + 0.01 * q) for q in range(n)])
        report = depth_report(control_circuit(c, ControlStrategy.with_ancillas(n)))
        assert report.measured_depth == 2 * ceil_log2(n) + 1
        assert report.lower_bound == ceil_log2(n)
        assert report.measured_depth <= 3.0 * report.lower_bound

    def test_phase_product_state(self):
        n = 4
        c = Circuit.from_gates(n, [global_phase(q, 0.3 + 0.01 * q) for q in range(n)])
        rng = np.random.default_rng(11)
        psi = _embed_with_ancillas(_random_state(1 << (n + 1), rng), n, n)
        reference = remap(controlled_naive(c), [0] + [n + j for j in range(n)], 2 * n)
        np.testing.assert_allclose(
            apply(control_with_ancillas(c, n), StateVector(psi)).amplitudes,
            apply(reference, StateVector(psi)).amplitudes,
            atol=1e-8,
        )

    def test_s_out_of_range(self):
        with pytest.raises(ContractError):
            control_with_ancillas(Circuit.from_gates(2, [h(0)]), 3)

    def test_single_copy_matches_naive_unitary(self):
        c = _random_circuit(3, 2, seed=5)
        np.testing.assert_allclose(
            unitary_of(control_with_ancillas(c, 1)), unitary_of(controlled_naive(c)), atol=1e-8,
        )


class TestControlStrategy:
    def test_default_is_naive(self):
        assert ControlStrategy().kind == "naive"

    def test_unknown_kind(self):
        with pytest.raises(ContractError, match="Valid values"):
            ControlStrategy("magic")

    def test_bad_lattice(self):
        with pytest.raises(ContractError):
            ControlStrategy.lattice(0, 3)

    def test_path_is_thin_lattice(self):
        strategy = ControlStrategy.path(5)
        assert (strategy.kind, strategy.l1, strategy.l2) == ("lattice", 5, 1)

    def test_describe_and_dict(self):
        strategy = ControlStrategy.with_ancillas(3)
        assert strategy.describe() == "ancilla(s=3)"
        assert strategy.to_dict() == {"kind": "ancilla", "ancillas": 3}

    @pytest.mark.parametrize("strategy", [
        ControlStrategy.naive(), ControlStrategy.with_ancillas(2), ControlStrategy.lattice(2, 3),
    ])
    def test_dispatch_layout(self, strategy):
        c = _random_circuit(3, 2, seed=9)
        controlled = control_circuit(c, strategy)
        assert controlled.control == 0
        assert len(controlled.data) == 3
        assert controlled.circuit.width == controlled.connectivity.n


class TestDepthReport:
    def test_naive_bound_is_gate_sum(self):
        c = Circuit.from_gates(2, [cnot(0, 1)])
        report = depth_report(control_circuit(c))
        assert report.measured_depth == 8
        assert report.bound_value == 8
        assert report.bound_applies

    @pytest.mark.parametrize("seed", range(10))
    def test_ancilla_bound_holds(self, seed):
        c = _random_circuit(6, 3, seed)
        report = depth_report(control_circuit(c, ControlStrategy.with_ancillas(3)))
        assert report.bound_applies
        assert report.measured_depth <= report.bound_value
        assert report.lower_bound <= report.measured_depth

    def test_bound_not_applicable_with_other_costs(self):
        c = _random_circuit(4, 2, seed=1)
        report = depth_report(control_circuit(c, ControlStrategy.with_ancillas(2)), cost=UNIT_COSTS)
        assert not report.bound_applies

    def test_overhead_and_notes(self):
        c = Circuit.from_gates(1, [h(0)])
        report = depth_report(control_circuit(c), overhead=3, notes={"k": "v"})
        assert report.bound_formula.endswith("+ 3")
        assert report.notes == {"construction": "naive", "k": "v"}
        assert report.to_dict()["connectivity"] == {"variant": "complete", "n": 2}

    def test_light_cone_with_unit_toffoli_cost(self):
        report = depth_report(control_circuit(Circuit.from_gates(2, [cnot(0, 1)])), cost=UNIT_COSTS)
        assert report.measured_depth == 1
        assert report.lower_bound == 1

    @pytest.mark.parametrize("cost", [
        GateCostModel(), UNIT_COSTS, GateCostModel.swap_as_cnots(), GateCostModel(default=2, toffoli=3),
    ])
    @pytest.mark.parametrize("strategy", [
        ControlStrategy.naive(), ControlStrategy.with_ancillas(2), ControlStrategy.lattice(2, 3),
    ])
    @pytest.mark.parametrize("seed", range(3))
    def test_lower_bound_below_measured(self, cost, strategy, seed):
        c = _random_circuit(4, 2, seed)
        report = depth_report(control_circuit(c, strategy), cost=cost)
        assert report.lower_bound <= report.measured_depth

    @pytest.mark.parametrize("n,graph,expected", [
        (4, ConnectivityGraph.path(4), 3),
        (16, ConnectivityGraph.lattice(4, 4), 6),
        (8, ConnectivityGraph.complete(8), 3),
        (9, ConnectivityGraph.lattice(3, 3), 4),
    ])
    def test_depth_lower_bound_examples(self, n, graph, expected):
        assert depth_lower_bound(n, graph) == expected

    def test_light_cone(self):
        c = Circuit.from_gates(4, [cnot(3, 2), cnot(2, 1), cnot(1, 0)])
        assert light_cone_lower_bound(c, ConnectivityGraph.path(4)) == 3
        assert light_cone_lower_bound(c, ConnectivityGraph.complete(4)) == 2

    def test_light_cone_ignores_later_gates(self):
        c = Circuit.from_gates(3, [h(0), cnot(1, 2)])
        assert light_cone_lower_bound(c, ConnectivityGraph.complete(3)) == 0

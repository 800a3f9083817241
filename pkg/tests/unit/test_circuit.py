"""Unit tests for circuit.py — gates, layering, controlled gates, state prep."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybrid_linsolve.circuit import (
    Circuit,
    Gate,
    GateCostModel,
    cnot,
    compose,
    controlled_gate,
    controlled_naive,
    controlled_rotation_plan,
    controlled_single_qubit,
    depth,
    expand_swaps,
    expand_toffolis,
    h,
    inverse,
    phase_gate,
    relayer,
    remap,
    rotation,
    rotation_from_matrix,
    s,
    sdg,
    swap,
    synthesize_state_prep,
    t_gate,
    toffoli,
    unitary_gate,
    validate_connectivity,
    x,
    zyz_decomposition,
)
from hybrid_linsolve.errors import ContractError
from hybrid_linsolve.simulator import apply, unitary_of, zero_state
from hybrid_linsolve.topology import ConnectivityGraph


def _random_unitary(seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(m)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _controlled_reference(u: np.ndarray) -> np.ndarray:
    """Controlled-U with the control on qubit 0 (lowest bit)."""
    dim = u.shape[0]
    out = np.zeros((2 * dim, 2 * dim), dtype=complex)
    out[0::2, 0::2] = np.eye(dim)
    out[1::2, 1::2] = u
    return out


@st.composite
def circuits(draw, max_width: int = 4, max_gates: int = 12):
    width = draw(st.integers(min_value=3, max_value=max_width))
    qubit = st.integers(min_value=0, max_value=width - 1)
    gates = []
    for _ in range(draw(st.integers(min_value=0, max_value=max_gates))):
        kind = draw(st.sampled_from(["H", "S", "X", "R", "CNOT", "SWAP", "Toffoli"]))
        qs = draw(st.lists(qubit, min_size=3, max_size=3, unique=True))
        if kind == "R":
            theta = draw(st.floats(min_value=-math.pi, max_value=math.pi))
            gates.append(rotation(qs[0], theta, (0.0, 0.6, 0.8), draw(st.floats(min_value=-1, max_value=1))))
        elif kind in ("CNOT", "SWAP"):
            gates.append(Gate(kind, tuple(qs[:2])))
        elif kind == "Toffoli":
            gates.append(toffoli(*qs))
        else:
            gates.append(Gate(kind, (qs[0],)))
    return Circuit.from_gates(width, gates)


class TestGate:
    def test_unknown_kind(self):
        with pytest.raises(ContractError, match="Valid values"):
            Gate("CZ", (0, 1))

    def test_wrong_arity(self):
        with pytest.raises(ContractError):
            Gate("CNOT", (0,))

    def test_repeated_qubit(self):
        with pytest.raises(ContractError):
            cnot(1, 1)

    def test_rotation_axis_must_be_unit(self):
        with pytest.raises(ContractError):
            rotation(0, 0.3, (1.0, 1.0, 0.0))

    def test_params_only_on_rotations(self):
        with pytest.raises(ContractError):
            Gate("H", (0,), (0.1,))

    @pytest.mark.parametrize("gate", [h(0), s(0), sdg(0), x(0), rotation(0, 0.7, (0.0, 0.6, 0.8), 0.2)])
    def test_adjoint(self, gate):
        np.testing.assert_allclose(gate.adjoint().matrix() @ gate.matrix(), np.eye(2), atol=1e-12)

    def test_phase_gate(self):
        np.testing.assert_allclose(phase_gate(0, 0.4).matrix(), np.diag([1, np.exp(0.4j)]), atol=1e-12)

    def test_t_gate(self):
        np.testing.assert_allclose(t_gate(0).matrix(), np.diag([1, np.exp(1j * math.pi / 4)]), atol=1e-12)

    @pytest.mark.parametrize("seed", range(10))
    def test_rotation_from_matrix(self, seed):
        u = _random_unitary(seed)
        np.testing.assert_allclose(unitary_gate(0, u).matrix(), u, atol=1e-10)

    def test_rotation_from_minus_identity(self):
        np.testing.assert_allclose(unitary_gate(0, -np.eye(2)).matrix(), -np.eye(2), atol=1e-12)
        assert len(rotation_from_matrix(np.eye(2))) == 5

    def test_json(self):
        g = rotation(2, 0.5, (0.0, 0.0, 1.0), 0.1)
        assert Gate.from_dict(g.to_dict()) == g

    def test_malformed_json(self):
        with pytest.raises(ContractError):
            Gate.from_dict({"qubits": [0]})


class TestZyz:
    @pytest.mark.parametrize("seed", range(10))
    def test_reconstruction(self, seed):
        u = _random_unitary(seed)
        alpha, beta, gamma, delta = zyz_decomposition(u)
        rebuilt = np.exp(1j * alpha) * (
            rotation(0, beta, (0, 0, 1)).matrix()
            @ rotation(0, gamma, (0, 1, 0)).matrix()
            @ rotation(0, delta, (0, 0, 1)).matrix()
        )
        np.testing.assert_allclose(rebuilt, u, atol=1e-10)

    @pytest.mark.parametrize("u", [np.eye(2), np.array([[0, 1], [1, 0]]), np.diag([1, 1j])])
    def test_degenerate(self, u):
        alpha, beta, gamma, delta = zyz_decomposition(u)
        rebuilt = np.exp(1j * alpha) * (
            rotation(0, beta, (0, 0, 1)).matrix()
            @ rotation(0, gamma, (0, 1, 0)).matrix()
            @ rotation(0, delta, (0, 0, 1)).matrix()
        )
        np.testing.assert_allclose(rebuilt, u, atol=1e-10)


class TestControlledSingleQubit:
    @pytest.mark.parametrize("seed", range(10))
    def test_matches_block_diagonal(self, seed):
        u = _random_unitary(seed)
        c = Circuit.from_gates(2, controlled_single_qubit(0, 1, u))
        np.testing.assert_allclose(unitary_of(c), _controlled_reference(u), atol=1e-10)

    def test_identity_needs_nothing(self):
        plan = controlled_rotation_plan(1, np.eye(2))
        assert not plan.needs_cnots
        assert plan.before is None and plan.middle is None and plan.after is None

    def test_x_needs_cnots(self):
        assert controlled_rotation_plan(1, np.array([[0, 1], [1, 0]])).needs_cnots


class TestCircuit:
    def test_asap_layering(self):
        c = Circuit.from_gates(3, [h(0), h(1), cnot(0, 1), x(2)])
        assert len(c.layers) == 2
        assert c.gate_count == 4

    def test_overlapping_layer_rejected(self):
        with pytest.raises(ContractError, match="more than one gate"):
            Circuit(2, ((h(0), cnot(0, 1)),))

    def test_qubit_beyond_width(self):
        with pytest.raises(ContractError):
            Circuit.from_gates(2, [h(2)])

    def test_empty_layers_dropped(self):
        assert Circuit(2, ((), (h(0),), ())).layers == ((h(0),),)

    def test_json(self):
        c = Circuit.from_gates(3, [h(0), toffoli(0, 1, 2), rotation(1, 0.3, (1, 0, 0))])
        assert Circuit.from_dict(c.to_dict()) == c

    def test_malformed_json(self):
        with pytest.raises(ContractError):
            Circuit.from_dict({"width": 2, "layers": [[{"kind": "H", "qubits": [5]}]]})

    def test_then(self):
        c = Circuit.from_gates(1, [h(0)]).then(Circuit.from_gates(1, [h(0)]))
        np.testing.assert_allclose(unitary_of(c), np.eye(2), atol=1e-12)

    def test_compose_width_mismatch(self):
        with pytest.raises(ContractError):
            compose(Circuit(1), Circuit(2))


class TestDepth:
    def test_unit_costs(self):
        c = Circuit.from_gates(3, [h(0), cnot(0, 1), cnot(1, 2), x(0)])
        assert depth(c, GateCostModel(toffoli=1)) == 3

    def test_toffoli_cost(self):
        c = Circuit.from_gates(3, [toffoli(0, 1, 2), h(2)])
        assert depth(c) == 9

    def test_swap_as_cnots(self):
        c = Circuit.from_gates(2, [swap(0, 1)])
        assert depth(c, GateCostModel.swap_as_cnots()) == 3

    def test_costs_must_be_positive(self):
        with pytest.raises(ContractError):
            GateCostModel(toffoli=0)


class TestRewrites:
    @settings(max_examples=25, deadline=None)
    @given(c=circuits())
    def test_inverse(self, c):
        dim = 1 << c.width
        np.testing.assert_allclose(unitary_of(compose(c, inverse(c))), np.eye(dim), atol=1e-9)

    @settings(max_examples=25, deadline=None)
    @given(c=circuits())
    def test_relayer_keeps_unitary(self, c):
        np.testing.assert_allclose(unitary_of(relayer(c)), unitary_of(c), atol=1e-10)

    @settings(max_examples=25, deadline=None)
    @given(c=circuits())
    def test_expansions_keep_unitary(self, c):
        expanded = expand_toffolis(expand_swaps(c))
        assert all(g.kind not in ("SWAP", "Toffoli") for g in expanded.gates())
        np.testing.assert_allclose(unitary_of(expanded), unitary_of(c), atol=1e-9)

    def test_remap(self):
        c = remap(Circuit.from_gates(2, [cnot(0, 1)]), [2, 0], 3)
        assert c.gates() == [cnot(2, 0)]
        assert c.width == 3

    def test_validate_connectivity(self):
        c = Circuit.from_gates(3, [cnot(0, 1), cnot(0, 2)])
        violations = validate_connectivity(c, ConnectivityGraph.path(3))
        assert [v.pair for v in violations] == [(0, 2)]

    def test_validate_connectivity_width(self):
        with pytest.raises(ContractError):
            validate_connectivity(Circuit(2), ConnectivityGraph.path(3))


class TestControlled:
    @pytest.mark.parametrize("gate", [
        x(0), h(1), s(0), sdg(1), rotation(0, 1.1, (0.0, 0.6, 0.8), 0.3),
        cnot(0, 1), cnot(1, 0), swap(0, 1),
    ])
    def test_single_gate(self, gate):
        c = Circuit.from_gates(3, controlled_gate(0, gate, offset=1))
        np.testing.assert_allclose(unitary_of(c), _controlled_reference(unitary_of(Circuit.from_gates(2, [gate]))), atol=1e-10)

    def test_toffoli(self):
        gate = toffoli(0, 1, 2)
        c = Circuit.from_gates(4, controlled_gate(0, gate, offset=1))
        np.testing.assert_allclose(unitary_of(c), _controlled_reference(unitary_of(Circuit.from_gates(3, [gate]))), atol=1e-9)

    @settings(max_examples=20, deadline=None)
    @given(c=circuits(max_width=3, max_gates=8))
    def test_controlled_naive(self, c):
        np.testing.assert_allclose(unitary_of(controlled_naive(c)), _controlled_reference(unitary_of(c)), atol=1e-9)


class TestStatePrep:
    @pytest.mark.parametrize("width", [1, 2, 3, 4])
    @pytest.mark.parametrize("seed", range(3))
    def test_random_complex(self, width, seed):
        rng = np.random.default_rng(seed)
        v = rng.normal(size=1 << width) + 1j * rng.normal(size=1 << width)
        v /= np.linalg.norm(v)
        out = apply(synthesize_state_prep(v, width), zero_state(width)).amplitudes
        np.testing.assert_allclose(out, v, atol=1e-10)

    @pytest.mark.parametrize("v", [
        [0, 0, 0, 1],
        [-1, 0, 0, 0],
        [0, 1j, 0, 0],
        [0.6, 0, -0.8, 0],
        [0.5, 0.5, 0.5, -0.5],
    ])
    def test_sparse_and_signed(self, v):
        v = np.asarray(v, dtype=complex)
        out = apply(synthesize_state_prep(v, 2), zero_state(2)).amplitudes
        np.testing.assert_allclose(out, v, atol=1e-10)

    def test_length_mismatch(self):
        with pytest.raises(ContractError):
            synthesize_state_prep([1, 0, 0], 2)

    def test_not_normalized(self):
        with pytest.raises(ContractError):
            synthesize_state_prep([1, 1], 1)

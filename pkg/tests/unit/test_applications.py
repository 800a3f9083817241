"""Unit tests for applications.py — using a solution without writing it out."""
import logging

import numpy as np
import pytest

from hybrid_linsolve.applications import (
    ObservableSpec,
    inner_product_with_state,
    observable_expectation,
    sample_budget_inner_product,
    sample_budget_observable,
)
from hybrid_linsolve.circuit import Circuit, cnot, h, phase_gate, rz, x
from hybrid_linsolve.errors import ContractError
from hybrid_linsolve.instances import ColumnOracle, random_instance
from hybrid_linsolve.simulator import unitary_of


def _unit(n: int, i: int) -> np.ndarray:
    v = np.zeros(n)
    v[i] = 1.0
    return v


def _columns(seed: int, width: int = 3, m: int = 3) -> tuple[ColumnOracle, ...]:
    return random_instance(width, m, seed=seed).columns


def _dense(columns, s) -> np.ndarray:
    return np.array([c.state for c in columns]).T @ np.asarray(s, dtype=complex)


class TestObservableSpec:
    def test_needs_terms(self):
        with pytest.raises(ContractError):
            ObservableSpec((), 1.0)

    def test_weight_range(self):
        with pytest.raises(ContractError):
            ObservableSpec(((2.0, Circuit(1)),), 1.0)

    def test_mixed_widths(self):
        with pytest.raises(ContractError):
            ObservableSpec(((1.0, Circuit(1)), (1.0, Circuit(2))), 1.0)

    def test_counts(self):
        obs = ObservableSpec(((0.5, Circuit(2)), (1.0, Circuit.from_gates(2, [x(0)]))), 1.0)
        assert obs.k_h == 2
        assert obs.width == 2


class TestInnerProduct:
    def test_same_state(self):
        cols = (ColumnOracle.from_vector(_unit(4, 0)), ColumnOracle.from_vector(_unit(4, 1)))
        assert inner_product_with_state([1.0, 0.0], cols, cols[0], 0, seed=0) == pytest.approx(1.0)

    def test_orthogonal_state(self):
        cols = (ColumnOracle.from_vector(_unit(4, 0)), ColumnOracle.from_vector(_unit(4, 1)))
        v = ColumnOracle.from_vector(_unit(4, 3))
        assert inner_product_with_state([0.4, -1.2], cols, v, 0, seed=0) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_exact_matches_dense(self, seed):
        cols = _columns(seed)
        s = np.random.default_rng(seed).normal(size=3) + 0.5j
        v = ColumnOracle.from_vector(np.random.default_rng(seed + 50).normal(size=8))
        expected = np.vdot(v.state, _dense(cols, s))
        assert inner_product_with_state(s, cols, v, 0, seed=0) == pytest.approx(expected, abs=1e-8)

    def test_sampled_within_band(self):
        cols = _columns(1, width=2, m=2)
        s = np.array([0.6, -0.3])
        v = ColumnOracle.from_vector([1.0, 1.0, 0.0, 1.0])
        expected = np.vdot(v.state, _dense(cols, s))
        got = inner_product_with_state(s, cols, v, 10 ** 6, seed=4)
        # two terms, each quadrature with standard error ≤ 1/√shots
        assert abs(got - expected) <= 3 * 2 * np.sqrt(2) * np.sum(np.abs(s)) / 10 ** 3

    def test_width_mismatch(self):
        cols = _columns(0)
        with pytest.raises(ContractError):
            inner_product_with_state([1, 0, 0], cols, ColumnOracle.from_vector([1.0, 0.0]), 0, seed=0)

    def test_coefficient_count(self):
        cols = _columns(0)
        with pytest.raises(ContractError):
            inner_product_with_state([1, 0], cols, cols[0], 0, seed=0)


class TestObservableExpectation:
    def test_identity_term(self):
        cols = (ColumnOracle.from_vector(_unit(4, 2)),)
        obs = ObservableSpec(((1.0, Circuit(2)),), 1.0)
        estimate = observable_expectation([1.0], cols, obs, 0, seed=0)
        assert estimate.value == pytest.approx(1.0)
        assert estimate.imaginary_residue == pytest.approx(0.0, abs=1e-12)

    def test_zero_coefficients(self):
        cols = _columns(2)
        obs = ObservableSpec(((1.0, Circuit.from_gates(3, [x(1)])),), 1.0)
        assert observable_expectation(np.zeros(3), cols, obs, 0, seed=0).value == 0.0

    @pytest.mark.parametrize("seed", range(4))
    def test_exact_matches_dense(self, seed):
        cols = _columns(seed)
        s = np.random.default_rng(seed).normal(size=3)
        # Hermitian unitary terms give a Hermitian H
        terms = (
            (0.7, Circuit.from_gates(3, [x(0), x(2)])),
            (0.4, Circuit.from_gates(3, [h(1)])),
        )
        obs = ObservableSpec(terms, 1.0)
        y = _dense(cols, s)
        dense_h = sum(g * unitary_of(c) for g, c in terms)
        expected = np.vdot(y, dense_h @ y)
        estimate = observable_expectation(s, cols, obs, 0, seed=0)
        assert estimate.value == pytest.approx(expected.real, abs=1e-8)
        assert estimate.imaginary_residue < 1e-8

    def test_rotation_term_on_plus_state(self):
        cols = (ColumnOracle.from_vector([1.0, 1.0]),)
        obs = ObservableSpec(((1.0, Circuit.from_gates(1, [rz(0, 1.0)])),), 1.0)
        estimate = observable_expectation([1.0], cols, obs, 0, seed=0)
        assert estimate.value == pytest.approx(np.cos(0.5), abs=1e-8)
        assert estimate.imaginary_residue < 1e-8

    def test_non_hermitian_reports_residue(self, caplog):
        cols = (ColumnOracle.from_vector([1.0, 1.0]),)
        obs = ObservableSpec(((1.0, Circuit.from_gates(1, [phase_gate(0, 1.0)])),), 1.0)
        with caplog.at_level(logging.WARNING, logger="hybrid_linsolve.applications"):
            estimate = observable_expectation([1.0], cols, obs, 0, seed=0)
        assert estimate.value == pytest.approx((1 + np.cos(1.0)) / 2, abs=1e-8)
        assert estimate.imaginary_residue == pytest.approx(np.sin(1.0) / 2, abs=1e-8)
        assert "imaginary residue" in caplog.text

    def test_width_mismatch(self):
        obs = ObservableSpec(((1.0, Circuit.from_gates(2, [cnot(0, 1)])),), 1.0)
        with pytest.raises(ContractError):
            observable_expectation([1, 0, 0], _columns(0), obs, 0, seed=0)


class TestApplicationBudgets:
    def test_inner_product_budget(self):
        assert sample_budget_inner_product(3, 2.0, 0.5, 0.1) == pytest.approx(3 * 4 * 0.25 / 0.01)

    def test_observable_budget(self):
        obs = ObservableSpec(((0.5, Circuit(1)), (1.0, Circuit(1))), 1.0)
        expected = 1.0 * 4 * 2.0 ** 4 * (1.0 + 0.25) ** 2 / 0.01
        assert sample_budget_observable(obs, 2.0, 0.5, 1.0, 0.1) == pytest.approx(expected)

    def test_rejects_bad_epsilon(self):
        with pytest.raises(ContractError):
            sample_budget_inner_product(3, 1.0, 1.0, 0.0)

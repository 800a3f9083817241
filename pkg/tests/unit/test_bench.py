"""Unit tests for bench.py — the shot-scaling sweep."""
import pytest

from hybrid_linsolve.bench import scaling_sweep
from hybrid_linsolve.errors import ContractError
from hybrid_linsolve.instances import random_instance


class TestScalingSweep:
    def test_slope_near_minus_half(self):
        result = scaling_sweep(min_log_shots=8, max_log_shots=16, seeds=30, seed=0)
        assert len(result.rows) == 9
        assert result.slope == pytest.approx(-0.5, abs=0.15)

    def test_median_between_extremes(self):
        result = scaling_sweep(random_instance(2, 2, seed=1), 6, 8, seeds=5, seed=2)
        for row in result.rows:
            assert row.min_error <= row.median_error <= row.max_error

    def test_rows_for_csv(self):
        result = scaling_sweep(random_instance(2, 2, seed=1), 4, 5, seeds=3, seed=0)
        rows = result.to_rows()
        assert [r["shots"] for r in rows] == [16, 32]
        assert rows[1]["log2_shots"] == pytest.approx(5.0)
        assert set(rows[0]) == {"shots", "log2_shots", "median_error", "min_error", "max_error"}

    def test_reproducible(self):
        instance = random_instance(2, 2, seed=1)
        assert scaling_sweep(instance, 4, 6, seeds=3, seed=7) == scaling_sweep(instance, 4, 6, seeds=3, seed=7)

    @pytest.mark.parametrize("low,high", [(5, 5), (-1, 3), (6, 2)])
    def test_bad_range(self, low, high):
        with pytest.raises(ContractError):
            scaling_sweep(random_instance(1, 1), low, high, seeds=2)

    def test_needs_seeds(self):
        with pytest.raises(ContractError):
            scaling_sweep(random_instance(1, 1), 2, 3, seeds=0)

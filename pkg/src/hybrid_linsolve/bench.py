"""Shot-scaling sweep for the sampled Gram estimator.

Measures the median spectral error ‖V̂ − V‖ over many seeds at each shot
count and fits its log-log slope, which should sit near −1/2.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .config import BENCH_COLUMNS, BENCH_MAX_LOG_SHOTS, BENCH_MIN_LOG_SHOTS, BENCH_QUBITS, BENCH_SEEDS
from .errors import ContractError
from .instances import LinearSystemInstance, random_instance
from .simulator import derive_seed
from .solver import gram_error, gram_probabilities, sample_gram
from .transpiler import ControlStrategy

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SweepRow:
    shots: int
    median_error: float
    min_error: float
    max_error: float


@dataclass(frozen=True)
class ScalingResult:
    rows: tuple[SweepRow, ...]
    slope: float
    intercept: float
    seeds: int
    seed: int

    def to_rows(self) -> list[dict[str, float]]:
        """Flat records for a CSV writer."""
        return [
            {
                "shots": r.shots,
                "log2_shots": float(np.log2(r.shots)),
                "median_error": r.median_error,
                "min_error": r.min_error,
                "max_error": r.max_error,
            }
            for r in self.rows
        ]


def scaling_sweep(
    instance: LinearSystemInstance | None = None,
    min_log_shots: int = BENCH_MIN_LOG_SHOTS,
    max_log_shots: int = BENCH_MAX_LOG_SHOTS,
    seeds: int = BENCH_SEEDS,
    seed: int = 0,
    strategy: ControlStrategy = ControlStrategy(),
) -> ScalingResult:
    if min_log_shots < 0 or max_log_shots <= min_log_shots:
        raise ContractError(f"need 0 ≤ min_log_shots < max_log_shots, got {min_log_shots}..{max_log_shots}")
    if seeds < 1:
        raise ContractError(f"seeds must be ≥ 1, got {seeds}")
    if instance is None:
        instance = random_instance(BENCH_QUBITS, BENCH_COLUMNS, seed=seed)
    columns = instance.columns
    probabilities = gram_probabilities(columns, strategy)

    rows = []
    for log_shots in range(min_log_shots, max_log_shots + 1):
        shots = 1 << log_shots
        errors = np.array([
            gram_error(columns, sample_gram(columns, probabilities, shots, derive_seed(seed, f"bench:{shots}:{k}")))
            for k in range(seeds)
        ])
        row = SweepRow(shots, float(np.median(errors)), float(errors.min()), float(errors.max()))
        logger.debug("shots=%d median ‖V̂−V‖=%.4g", shots, row.median_error)
        rows.append(row)

    log_s = np.log([r.shots for r in rows])
    log_e = np.log([max(r.median_error, 1e-300) for r in rows])
    slope, intercept = np.polyfit(log_s, log_e, 1)
    logger.info("fitted log-log slope %.3f over %d shot counts", slope, len(rows))
    return ScalingResult(tuple(rows), float(slope), float(intercept), seeds, seed)

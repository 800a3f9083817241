"""Hybrid solvers for skewed linear systems.

Every solver estimates a small Gram matrix and right-hand side entry by
entry with Hadamard tests, then finishes with a classical solve of size
M×M (or R×R). In ``exact`` mode each overlap is the exact expectation of
its test, so only the regularization shift contributes error.

Budgets follow the sufficiency bounds with every O(·) constant set to 1,
multiplied by ``SolveConfig.budget_scale``.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence, TypeVar

import numpy as np

from .config import (
    DEFAULT_BUDGET_SCALE,
    DEFAULT_DELTA,
    DEFAULT_EPSILON,
    DEFAULT_MODE,
    DEFAULT_WORKERS,
    MAX_SHOTS,
    RANK_TOLERANCE,
    VALID_MODES,
    SolveMode,
)
from .errors import ContractError, DomainError
from .hadamard import (
    HadamardProbabilities,
    estimate_overlap,
    hadamard_depth_report,
    hadamard_probabilities,
    sample_overlap,
)
from .instances import ColumnOracle, FactorizedInstance, LinearSystemInstance, oracle_matrix
from .numerics import SpectralMetrics, hermitian_part, pseudo_inverse, solve_shifted, spectral_metrics
from .simulator import derive_seed
from .transpiler import ControlStrategy, DepthReport

logger = logging.getLogger(__name__)

T = TypeVar("T")


@dataclass
class SolveConfig:
    epsilon: float = DEFAULT_EPSILON
    mode: SolveMode = DEFAULT_MODE
    shot_override: int | None = None
    budget_scale: float = DEFAULT_BUDGET_SCALE
    seed: int = 0
    delta: float = DEFAULT_DELTA
    norm_bound_x: float | None = None
    strategy: ControlStrategy = field(default_factory=ControlStrategy)
    workers: int = DEFAULT_WORKERS
    exact_diagonal: bool = False

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise ContractError(f"epsilon must be > 0, got {self.epsilon}")
        if not self.budget_scale > 0:
            raise ContractError(f"budget_scale must be > 0, got {self.budget_scale}")
        if self.mode not in VALID_MODES:
            raise ContractError(f"unknown mode '{self.mode}'. Valid values: {', '.join(sorted(VALID_MODES))}")
        if self.shot_override is not None and self.shot_override < 1:
            raise ContractError(f"shot_override must be ≥ 1, got {self.shot_override}")
        if not 0 < self.delta < 1:
            raise ContractError(f"delta must lie in (0, 1), got {self.delta}")
        if self.workers < 1:
            raise ContractError(f"workers must be ≥ 1, got {self.workers}")
        if self.norm_bound_x is not None and self.norm_bound_x < 0:
            raise ContractError(f"norm_bound_x must be ≥ 0, got {self.norm_bound_x}")


@dataclass(frozen=True)
class GramEstimate:
    matrix: np.ndarray
    shots_per_entry: int
    gamma: float
    min_eigenvalue: float


@dataclass(frozen=True)
class SampleBudget:
    """Regularization shift λ, repetition count T and entry-size bound Γ."""
    lam: float
    t: float
    gamma: float

    @property
    def shots_per_entry(self) -> int:
        return _shots(self.gamma ** 2 * self.t)


@dataclass(frozen=True)
class FactorizedBudget:
    lam: float
    t1: float
    t2: float
    gamma: float
    epsilon1: float

    @property
    def shots_stage1(self) -> int:
        return _shots(self.gamma ** 2 * self.t1)

    @property
    def shots_stage2(self) -> int:
        return _shots(self.gamma ** 2 * self.t2)


@dataclass(frozen=True)
class SolveReport:
    problem: str
    coefficients: np.ndarray
    residual_gap: float
    lambda_used: float
    shots_used: dict[str, int]
    budgets: dict[str, float]
    seed: int
    mode: str
    epsilon: float
    gram_min_eigenvalue: float
    depth_stats: tuple[DepthReport, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "problem": self.problem,
            "coefficients": [[float(z.real), float(z.imag)] for z in self.coefficients],
            "residual_gap": self.residual_gap,
            "lambda_used": self.lambda_used,
            "shots_used": dict(self.shots_used),
            "budgets": dict(self.budgets),
            "seed": self.seed,
            "mode": self.mode,
            "epsilon": self.epsilon,
            "gram_min_eigenvalue": self.gram_min_eigenvalue,
            "depth_stats": [r.to_dict() for r in self.depth_stats],
        }


def _shots(value: float) -> int:
    if not math.isfinite(value) or value >= MAX_SHOTS:
        logger.warning("shot budget %.3g exceeds the sampler limit; clamped to %d", value, MAX_SHOTS)
        return MAX_SHOTS
    return max(1, math.ceil(value))


def _run(tasks: Sequence[Callable[[], T]], workers: int) -> list[T]:
    if workers <= 1 or len(tasks) <= 1:
        return [task() for task in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda task: task(), tasks))


def _check_columns(columns: Sequence[ColumnOracle]) -> None:
    if not columns:
        raise ContractError("at least one column oracle is required")
    widths = {c.width for c in columns}
    if len(widths) != 1:
        raise ContractError(f"column oracles have mixed widths {sorted(widths)}")


def _check_nonzero(columns: Sequence[ColumnOracle], what: str) -> None:
    zero = [j for j, c in enumerate(columns) if c.norm == 0.0]
    if zero:
        raise DomainError(f"{what} {zero} have zero norm")


# ── Estimators ────────────────────────────────────────────────────────────────

def gram_probabilities(
    columns: Sequence[ColumnOracle],
    strategy: ControlStrategy = ControlStrategy(),
    workers: int = DEFAULT_WORKERS,
) -> dict[tuple[int, int], HadamardProbabilities]:
    """Exact test probabilities for every entry j ≤ k, simulated once."""
    _check_columns(columns)
    pairs = [(j, k) for j in range(len(columns)) for k in range(j, len(columns))]
    tasks = [
        (lambda j=j, k=k: hadamard_probabilities(columns[j].prep, columns[k].prep, strategy))
        for j, k in pairs
    ]
    return dict(zip(pairs, _run(tasks, workers)))


def _exact_entry(a: ColumnOracle, b: ColumnOracle, strategy: ControlStrategy) -> tuple[complex, DepthReport]:
    value = estimate_overlap(a.prep, b.prep, 0, 0, strategy).value
    return a.norm * b.norm * value, hadamard_depth_report(a.prep, b.prep, strategy)


def exact_gram_entries(
    columns: Sequence[ColumnOracle],
    strategy: ControlStrategy = ControlStrategy(),
    workers: int = DEFAULT_WORKERS,
) -> dict[tuple[int, int], tuple[complex, DepthReport]]:
    """Exact V_jk for every j ≤ k, each with the depth of the test circuit that estimates it."""
    _check_columns(columns)
    pairs = [(j, k) for j in range(len(columns)) for k in range(j, len(columns))]
    tasks = [(lambda j=j, k=k: _exact_entry(columns[j], columns[k], strategy)) for j, k in pairs]
    return dict(zip(pairs, _run(tasks, workers)))


def _exact_gram(
    columns: Sequence[ColumnOracle], entries: dict[tuple[int, int], tuple[complex, DepthReport]],
) -> GramEstimate:
    m = len(columns)
    raw = np.zeros((m, m), dtype=complex)
    for (j, k), (value, _) in entries.items():
        raw[k, j] = np.conj(value)
        raw[j, k] = value
    return _finish_gram(raw, 0, np.array([c.norm for c in columns]))


def _finish_gram(raw: np.ndarray, shots: int, norms: np.ndarray) -> GramEstimate:
    matrix = hermitian_part(raw)
    min_eig = float(np.linalg.eigvalsh(matrix)[0])
    if min_eig < -1e-12 * max(1.0, float(np.max(norms)) ** 2):
        logger.warning("estimated Gram matrix has a negative eigenvalue %.3e (sampling slack)", min_eig)
    return GramEstimate(matrix, shots, float(np.max(norms) ** 2), min_eig)


def sample_gram(
    columns: Sequence[ColumnOracle],
    probabilities: dict[tuple[int, int], HadamardProbabilities],
    shots_per_entry: int,
    seed: int,
    exact_diagonal: bool = False,
) -> GramEstimate:
    """Draw fresh shots for every entry from precomputed test probabilities."""
    m = len(columns)
    norms = np.array([c.norm for c in columns])
    raw = np.zeros((m, m), dtype=complex)
    for (j, k), probs in probabilities.items():
        if exact_diagonal and j == k:
            raw[j, j] = norms[j] ** 2
            continue
        estimate = sample_overlap(probs, shots_per_entry, derive_seed(seed, f"gram:{j}:{k}"))
        raw[j, k] = norms[j] * norms[k] * estimate.value
        raw[k, j] = np.conj(raw[j, k])
    return _finish_gram(raw, shots_per_entry, norms)


def estimate_gram(
    columns: Sequence[ColumnOracle],
    shots_per_entry: int,
    seed: int,
    mode: SolveMode = DEFAULT_MODE,
    strategy: ControlStrategy = ControlStrategy(),
    exact_diagonal: bool = False,
    workers: int = DEFAULT_WORKERS,
) -> GramEstimate:
    """Estimate ``V_jk = ‖a_j‖‖a_k‖⟨a_j|a_k⟩`` for j ≤ k and mirror the rest."""
    _check_columns(columns)
    if mode not in VALID_MODES:
        raise ContractError(f"unknown mode '{mode}'. Valid values: {', '.join(sorted(VALID_MODES))}")
    if mode == "exact":
        return _exact_gram(columns, exact_gram_entries(columns, strategy, workers))
    if shots_per_entry < 1:
        raise ContractError(f"sampled mode needs shots_per_entry ≥ 1, got {shots_per_entry}")
    probabilities = gram_probabilities(columns, strategy, workers)
    return sample_gram(columns, probabilities, shots_per_entry, seed, exact_diagonal)


def _sampled_rhs_entry(
    c: ColumnOracle, b: ColumnOracle, shots: int, seed: int, strategy: ControlStrategy,
) -> tuple[complex, DepthReport]:
    probabilities = hadamard_probabilities(c.prep, b.prep, strategy)
    return c.norm * b.norm * sample_overlap(probabilities, shots, seed).value, probabilities.report


def estimate_rhs_entries(
    columns: Sequence[ColumnOracle],
    b: ColumnOracle,
    shots_per_entry: int,
    seed: int,
    mode: SolveMode = DEFAULT_MODE,
    strategy: ControlStrategy = ControlStrategy(),
    workers: int = DEFAULT_WORKERS,
) -> tuple[np.ndarray, list[DepthReport]]:
    """Estimate ``q_j = ‖a_j‖‖b‖⟨a_j|b⟩`` with the depth of each test circuit."""
    _check_columns([*columns, b])
    if mode not in VALID_MODES:
        raise ContractError(f"unknown mode '{mode}'. Valid values: {', '.join(sorted(VALID_MODES))}")
    if mode == "exact":
        tasks = [(lambda c=c: _exact_entry(c, b, strategy)) for c in columns]
    else:
        if shots_per_entry < 1:
            raise ContractError(f"sampled mode needs shots_per_entry ≥ 1, got {shots_per_entry}")
        tasks = [
            (lambda c=c, j=j: _sampled_rhs_entry(c, b, shots_per_entry, derive_seed(seed, f"rhs:{j}"), strategy))
            for j, c in enumerate(columns)
        ]
    results = _run(tasks, workers)
    return np.array([value for value, _ in results], dtype=complex), [report for _, report in results]


def estimate_rhs(
    columns: Sequence[ColumnOracle],
    b: ColumnOracle,
    shots_per_entry: int,
    seed: int,
    mode: SolveMode = DEFAULT_MODE,
    strategy: ControlStrategy = ControlStrategy(),
    workers: int = DEFAULT_WORKERS,
) -> np.ndarray:
    """Estimate ``q_j = ‖a_j‖‖b‖⟨a_j|b⟩``."""
    return estimate_rhs_entries(columns, b, shots_per_entry, seed, mode, strategy, workers)[0]


def _depth_stats(probabilities: dict[tuple[int, int], HadamardProbabilities]) -> list[DepthReport]:
    return [p.report for p in probabilities.values()]


# ── Budgets ───────────────────────────────────────────────────────────────────

def _nonzero(value: float, what: str) -> float:
    if value == 0.0:
        logger.warning("%s is zero; using 1.0 in the budget formulas", what)
        return 1.0
    return value


def sample_budget_overdetermined(
    metrics: SpectralMetrics,
    b_norm: float,
    epsilon: float,
    norm_bound_x: float,
    column_norms: Sequence[float],
    budget_scale: float = DEFAULT_BUDGET_SCALE,
) -> SampleBudget:
    """λ = ε/(2‖A‖²‖A⁻¹‖⁴‖b‖),
    T = M‖A⁻¹‖⁴κ⁴‖b‖²(‖A‖(‖x*‖+1)+ε)²/ε⁴,
    Γ₁ = max_j max(‖a_j‖‖b‖, ‖a_j‖²).
    """
    a, inv, kappa = metrics.spectral_norm, metrics.pinv_norm, metrics.condition_number
    m = len(column_norms)
    b = _nonzero(b_norm, "‖b‖")
    lam = epsilon / (2 * a ** 2 * inv ** 4 * b)
    t = m * inv ** 4 * kappa ** 4 * b ** 2 * (a * (norm_bound_x + 1) + epsilon) ** 2 / epsilon ** 4
    gamma = max(max(n * b_norm, n * n) for n in column_norms)
    return SampleBudget(lam=lam, t=t * budget_scale, gamma=gamma)


def sample_budget_underdetermined(
    metrics: SpectralMetrics,
    c_norm: float,
    epsilon: float,
    norm_bound_alpha: float,
    column_norms: Sequence[float],
    budget_scale: float = DEFAULT_BUDGET_SCALE,
) -> SampleBudget:
    """λ = ε/(2‖A⁻¹‖⁸‖A‖⁴‖c‖),
    T = Mκ¹²‖A⁻¹‖⁴‖c‖²(‖A‖²‖α*‖+ε+‖c‖)²/ε⁴ + M/‖A‖⁴,
    Γ₂ = max_j ‖a_j‖².
    """
    a, inv, kappa = metrics.spectral_norm, metrics.pinv_norm, metrics.condition_number
    m = len(column_norms)
    c = _nonzero(c_norm, "‖c‖")
    lam = epsilon / (2 * inv ** 8 * a ** 4 * c)
    t = (
        m * kappa ** 12 * inv ** 4 * c ** 2 * (a ** 2 * norm_bound_alpha + epsilon + c) ** 2 / epsilon ** 4
        + m / a ** 4
    )
    gamma = max(n * n for n in column_norms)
    return SampleBudget(lam=lam, t=t * budget_scale, gamma=gamma)


def _factor_gamma(left: Sequence[float], right: Sequence[float], b_norm: float) -> float:
    return max(
        max(u * u for u in left),
        max(u * b_norm for u in left),
        max(v * v for v in right),
    )


def sample_budget_factorized(
    left_metrics: SpectralMetrics,
    right_metrics: SpectralMetrics,
    a_norm: float,
    b_norm: float,
    epsilon: float,
    left_norms: Sequence[float],
    right_norms: Sequence[float],
    budget_scale: float = DEFAULT_BUDGET_SCALE,
) -> FactorizedBudget:
    """T₁ = R‖A‖²‖V⁻¹‖²‖Q⁻¹‖²(1+‖y*‖²)(1+‖α*‖²)/ε²,
    T₂ = R‖A‖²‖Q⁻¹‖²(1+‖α*‖²)/ε²,

    with ‖V⁻¹‖ = ‖A₁⁻¹‖², ‖Q⁻¹‖ = ‖A₂⁻¹‖², ‖y*‖ ≤ ‖V⁻¹‖‖A₁‖‖b‖ and
    ‖α*‖ ≤ ‖Q⁻¹‖‖y*‖.
    """
    r = len(left_norms)
    v_inv = left_metrics.pinv_norm ** 2
    q_inv = right_metrics.pinv_norm ** 2
    y_star = v_inv * left_metrics.spectral_norm * b_norm
    alpha_star = q_inv * y_star
    t1 = r * a_norm ** 2 * v_inv ** 2 * q_inv ** 2 * (1 + y_star ** 2) * (1 + alpha_star ** 2) / epsilon ** 2
    t2 = r * a_norm ** 2 * q_inv ** 2 * (1 + alpha_star ** 2) / epsilon ** 2
    return FactorizedBudget(
        lam=0.0,
        t1=t1 * budget_scale,
        t2=t2 * budget_scale,
        gamma=_factor_gamma(left_norms, right_norms, b_norm),
        epsilon1=epsilon,
    )


def sample_budget_factorized_relaxed(
    left_metrics: SpectralMetrics,
    right_metrics: SpectralMetrics,
    b_norm: float,
    epsilon: float,
    left_norms: Sequence[float],
    right_norms: Sequence[float],
    budget_scale: float = DEFAULT_BUDGET_SCALE,
) -> FactorizedBudget:
    """Budget when A₁ may be rank-deficient.

    T₂ = R‖A₁‖²‖A₂‖²‖A₂⁻¹‖⁴(1+‖α*‖)²/ε², ε₁ = min(ε, √(R/T₂)),
    T₁ = R‖A₁⁻¹‖⁸‖A₁‖²‖b‖²(‖A₁‖(‖y*‖+1)+ε₁)²/ε₁⁴ and
    λ = ε₁/(2‖A₁⁻¹‖⁴‖A₁‖²‖b‖).
    """
    r = len(left_norms)
    a1, a1_inv = left_metrics.spectral_norm, left_metrics.pinv_norm
    a2, a2_inv = right_metrics.spectral_norm, right_metrics.pinv_norm
    b = _nonzero(b_norm, "‖b‖")
    y_star = a1_inv ** 2 * a1 * b_norm
    alpha_star = a2_inv ** 4 * y_star
    t2 = r * a1 ** 2 * a2 ** 2 * a2_inv ** 4 * (1 + alpha_star) ** 2 / epsilon ** 2
    epsilon1 = min(epsilon, math.sqrt(r / t2))
    t1 = r * a1_inv ** 8 * a1 ** 2 * b ** 2 * (a1 * (y_star + 1) + epsilon1) ** 2 / epsilon1 ** 4
    return FactorizedBudget(
        lam=epsilon1 / (2 * a1_inv ** 4 * a1 ** 2 * b),
        t1=t1 * budget_scale,
        t2=t2 * budget_scale,
        gamma=_factor_gamma(left_norms, right_norms, b_norm),
        epsilon1=epsilon1,
    )


# ── Residuals ─────────────────────────────────────────────────────────────────

def _least_squares_gap(a: np.ndarray, sol: np.ndarray, rhs: np.ndarray) -> float:
    best = a @ (pseudo_inverse(a, RANK_TOLERANCE) @ rhs)
    return float(np.linalg.norm(a @ sol - rhs) - np.linalg.norm(best - rhs))


def factorized_residual_gap(instance: FactorizedInstance, coefficients) -> float:
    """‖A x̂ − b‖ − min ‖Ax − b‖ with x̂ = Σ s_j |v_j⟩."""
    s = np.asarray(coefficients, dtype=complex)
    x = np.array([v.state for v in instance.right]).T @ s
    return _least_squares_gap(instance.matrix(), x, instance.rhs.vector())


def residual_gap(instance: LinearSystemInstance | FactorizedInstance, coefficients) -> float:
    """Gap to the least-squares optimum of the problem ``instance`` poses.

    With an oracle right-hand side the coefficients are x̂ and the gap is
    ‖Ax̂ − b‖ − ‖AA⁺b − b‖. With a classical c they are s, ŷ = Σ s_j|a_j⟩,
    and the gap is ‖A†ŷ − c‖ − ‖A†(A†)⁺c − c‖.
    """
    if isinstance(instance, FactorizedInstance):
        return factorized_residual_gap(instance, coefficients)
    s = np.asarray(coefficients, dtype=complex)
    if s.shape != (len(instance.columns),):
        raise ContractError(f"expected {len(instance.columns)} coefficients, got shape {s.shape}")
    a = instance.matrix()
    if instance.rhs_is_oracle:
        return _least_squares_gap(a, s, instance.rhs_vector())
    y = np.array([c.state for c in instance.columns]).T @ s
    adjoint = a.conj().T
    best = adjoint @ (pseudo_inverse(adjoint, RANK_TOLERANCE) @ instance.rhs_vector())
    c = instance.rhs_vector()
    return float(np.linalg.norm(adjoint @ y - c) - np.linalg.norm(best - c))


# ── Solvers ───────────────────────────────────────────────────────────────────

def _gram_and_stats(
    columns: Sequence[ColumnOracle], shots: int, config: SolveConfig, label: str,
) -> tuple[GramEstimate, list[DepthReport]]:
    seed = derive_seed(config.seed, label)
    if config.mode == "exact":
        entries = exact_gram_entries(columns, config.strategy, config.workers)
        return _exact_gram(columns, entries), [report for _, report in entries.values()]
    probabilities = gram_probabilities(columns, config.strategy, config.workers)
    gram = sample_gram(columns, probabilities, shots, seed, config.exact_diagonal)
    return gram, _depth_stats(probabilities)


def _rhs(
    columns: Sequence[ColumnOracle], b: ColumnOracle, shots: int, config: SolveConfig, label: str,
) -> tuple[np.ndarray, list[DepthReport]]:
    return estimate_rhs_entries(
        columns, b, shots, derive_seed(config.seed, label), config.mode, config.strategy, config.workers,
    )


def _shots_for(config: SolveConfig, budget_shots: int) -> int:
    if config.mode == "exact":
        return 0
    return config.shot_override if config.shot_override is not None else budget_shots


def solve_overdetermined(instance: LinearSystemInstance, config: SolveConfig) -> SolveReport:
    """x̂ = (V̂ + λI)⁻¹ q̂ for min ‖Ax − b‖."""
    if not instance.rhs_is_oracle:
        raise ContractError("the over-determined solver needs an oracle right-hand side b")
    _check_nonzero(instance.columns, "columns")
    metrics = instance.resolved_metrics()
    b = instance.rhs
    norms = [c.norm for c in instance.columns]
    norm_x = config.norm_bound_x
    if norm_x is None:
        # ‖x*‖ ≤ ‖V⁻¹‖‖q‖ with ‖V⁻¹‖ = ‖A⁻¹‖² and q = A†b
        q_exact = instance.matrix().conj().T @ instance.rhs_vector()
        norm_x = metrics.pinv_norm ** 2 * float(np.linalg.norm(q_exact))
    budget = sample_budget_overdetermined(metrics, b.norm, config.epsilon, norm_x, norms, config.budget_scale)
    shots = _shots_for(config, budget.shots_per_entry)
    logger.info("over-determined: λ=%.4g T=%.4g Γ₁=%.4g shots/entry=%d", budget.lam, budget.t, budget.gamma, shots)

    gram, stats = _gram_and_stats(instance.columns, shots, config, "gram")
    q, rhs_stats = _rhs(instance.columns, b, shots, config, "rhs")
    x = solve_shifted(gram.matrix, q, budget.lam)
    gap = residual_gap(instance, x)
    logger.info("over-determined residual gap %.3e (ε = %g)", gap, config.epsilon)
    return SolveReport(
        problem="overdetermined",
        coefficients=x,
        residual_gap=gap,
        lambda_used=budget.lam,
        shots_used={"gram": shots, "rhs": shots},
        budgets={"t": budget.t, "gamma": budget.gamma, "shots_per_entry": float(budget.shots_per_entry)},
        seed=config.seed,
        mode=config.mode,
        epsilon=config.epsilon,
        gram_min_eigenvalue=gram.min_eigenvalue,
        depth_stats=tuple(stats + rhs_stats),
    )


def solve_underdetermined(instance: LinearSystemInstance, config: SolveConfig) -> SolveReport:
    """α̂ = (V̂² + λI)⁻¹V̂c and s_j = α̂_j‖a_j‖ for min ‖A†y − c‖."""
    if instance.rhs_is_oracle:
        raise ContractError("the under-determined solver needs a classical vector c of length M")
    _check_nonzero(instance.columns, "columns")
    metrics = instance.resolved_metrics()
    c = instance.rhs_vector()
    c_norm = float(np.linalg.norm(c))
    norms = [col.norm for col in instance.columns]
    norm_alpha = config.norm_bound_x
    if norm_alpha is None:
        norm_alpha = metrics.pinv_norm ** 2 * c_norm
    budget = sample_budget_underdetermined(metrics, c_norm, config.epsilon, norm_alpha, norms, config.budget_scale)
    shots = _shots_for(config, budget.shots_per_entry)
    logger.info("under-determined: λ=%.4g T=%.4g Γ₂=%.4g shots/entry=%d", budget.lam, budget.t, budget.gamma, shots)

    gram, stats = _gram_and_stats(instance.columns, shots, config, "gram")
    v = gram.matrix
    alpha = solve_shifted(v @ v, v @ c, budget.lam)
    s = alpha * np.array(norms)
    gap = residual_gap(instance, s)
    logger.info("under-determined residual gap %.3e (ε = %g)", gap, config.epsilon)
    return SolveReport(
        problem="underdetermined",
        coefficients=s,
        residual_gap=gap,
        lambda_used=budget.lam,
        shots_used={"gram": shots},
        budgets={"t": budget.t, "gamma": budget.gamma, "shots_per_entry": float(budget.shots_per_entry)},
        seed=config.seed,
        mode=config.mode,
        epsilon=config.epsilon,
        gram_min_eigenvalue=gram.min_eigenvalue,
        depth_stats=tuple(stats),
    )


def _solve_factorized(instance: FactorizedInstance, config: SolveConfig, relaxed: bool) -> SolveReport:
    _check_nonzero(instance.left, "A₁ columns")
    _check_nonzero(instance.right, "A₂ rows")
    left_metrics = spectral_metrics(instance.left_matrix())
    right_metrics = spectral_metrics(instance.right_matrix())
    left_norms = [u.norm for u in instance.left]
    right_norms = [v.norm for v in instance.right]
    b = instance.rhs
    if relaxed:
        budget = sample_budget_factorized_relaxed(
            left_metrics, right_metrics, b.norm, config.epsilon, left_norms, right_norms, config.budget_scale,
        )
    else:
        a_norm = spectral_metrics(instance.matrix()).spectral_norm
        budget = sample_budget_factorized(
            left_metrics, right_metrics, a_norm, b.norm, config.epsilon, left_norms, right_norms,
            config.budget_scale,
        )
    shots1 = _shots_for(config, budget.shots_stage1)
    shots2 = _shots_for(config, budget.shots_stage2)
    logger.info(
        "factorized%s: λ=%.4g T₁=%.4g T₂=%.4g Γ=%.4g", " (relaxed)" if relaxed else "",
        budget.lam, budget.t1, budget.t2, budget.gamma,
    )

    v1, stats1 = _gram_and_stats(instance.left, shots1, config, "gram-left")
    q, rhs_stats = _rhs(instance.left, b, shots1, config, "rhs-left")
    y = solve_shifted(v1.matrix, q, budget.lam)
    gram_q, stats2 = _gram_and_stats(instance.right, shots2, config, "gram-right")
    alpha = solve_shifted(gram_q.matrix, y, 0.0)
    s = alpha * np.array(right_norms)
    gap = factorized_residual_gap(instance, s)
    logger.info("factorized residual gap %.3e (ε = %g)", gap, config.epsilon)
    return SolveReport(
        problem="factorized-relaxed" if relaxed else "factorized",
        coefficients=s,
        residual_gap=gap,
        lambda_used=budget.lam,
        shots_used={"stage1": shots1, "stage2": shots2},
        budgets={"t1": budget.t1, "t2": budget.t2, "gamma": budget.gamma, "epsilon1": budget.epsilon1},
        seed=config.seed,
        mode=config.mode,
        epsilon=config.epsilon,
        gram_min_eigenvalue=min(v1.min_eigenvalue, gram_q.min_eigenvalue),
        depth_stats=tuple(stats1 + rhs_stats + stats2),
    )


def solve_factorized(instance: FactorizedInstance, config: SolveConfig) -> SolveReport:
    """Two pseudo-inverse stages: ŷ = V̂₁⁺q̂, then α̂ = Q̂⁺ŷ with s_j = α̂_j‖v_j‖."""
    return _solve_factorized(instance, config, relaxed=False)


def solve_factorized_relaxed(instance: FactorizedInstance, config: SolveConfig) -> SolveReport:
    """Like :func:`solve_factorized` with a shifted first stage for rank-deficient A₁."""
    return _solve_factorized(instance, config, relaxed=True)


def gram_error(columns: Sequence[ColumnOracle], estimate: GramEstimate) -> float:
    """Spectral-norm distance between an estimate and the exact Gram matrix."""
    exact = oracle_matrix(columns)
    return float(np.linalg.norm(estimate.matrix - exact.conj().T @ exact, 2))

"""Problem instances built from state-preparation oracles.

A column ``a_j`` is given by a circuit ``U_j`` with ``U_j|0⟩ = |a_j⟩`` and the
norm ``‖a_j‖``. At desk scale the dense matrix can always be rebuilt from
the oracles for verification.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Any, Sequence, Union

import numpy as np
from scipy.stats import unitary_group

from .circuit import Circuit, synthesize_state_prep
from .errors import ContractError
from .numerics import SpectralMetrics, as_matrix, as_vector, spectral_metrics
from .simulator import apply, zero_state
from .transpiler import ceil_log2

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ColumnOracle:
    prep: Circuit
    norm: float

    def __post_init__(self) -> None:
        norm = float(self.norm)
        if not np.isfinite(norm) or norm < 0:
            raise ContractError(f"oracle norm must be a finite value ≥ 0, got {self.norm}")
        object.__setattr__(self, "norm", norm)

    @property
    def width(self) -> int:
        return self.prep.width

    @cached_property
    def state(self) -> np.ndarray:
        """Unit vector prepared from |0…0⟩."""
        return apply(self.prep, zero_state(self.width)).amplitudes

    def vector(self) -> np.ndarray:
        return self.norm * self.state

    @classmethod
    def from_vector(cls, v, width: int | None = None) -> ColumnOracle:
        """Oracle for ``v`` zero-padded to ``2**width`` entries."""
        v = as_vector(v)
        width = max(1, ceil_log2(max(v.shape[0], 1))) if width is None else width
        if v.shape[0] > 1 << width:
            raise ContractError(f"vector of length {v.shape[0]} does not fit {width} qubits")
        padded = np.zeros(1 << width, dtype=complex)
        padded[: v.shape[0]] = v
        norm = float(np.linalg.norm(padded))
        if norm == 0.0:
            return cls(Circuit(width), 0.0)
        return cls(synthesize_state_prep(padded / norm, width), norm)

    def to_dict(self) -> dict[str, Any]:
        return {"prep": self.prep.to_dict(), "norm": self.norm}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ColumnOracle:
        try:
            return cls(Circuit.from_dict(data["prep"]), float(data["norm"]))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ContractError):
                raise
            raise ContractError(f"malformed oracle {list(data) if isinstance(data, dict) else data!r}: {exc!r}") from exc


Rhs = Union[ColumnOracle, np.ndarray]


def _check_shared_width(oracles: Sequence[ColumnOracle], what: str) -> int:
    if not oracles:
        raise ContractError(f"{what} must not be empty")
    widths = {o.width for o in oracles}
    if len(widths) != 1:
        raise ContractError(f"{what} have mixed widths {sorted(widths)}")
    return widths.pop()


def oracle_matrix(oracles: Sequence[ColumnOracle]) -> np.ndarray:
    """Dense matrix whose columns are ``norm × state``."""
    return np.column_stack([o.vector() for o in oracles])


@dataclass(frozen=True)
class LinearSystemInstance:
    """Problem with columns given by oracles.

    ``rhs`` is an oracle for b in the over-determined problem (minimize
    ‖Ax − b‖) and a classical vector c of length M in the under-determined
    problem (minimize ‖A†y − c‖).
    """
    columns: tuple[ColumnOracle, ...]
    rhs: Rhs
    metrics: SpectralMetrics | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "columns", tuple(self.columns))
        width = _check_shared_width(self.columns, "columns")
        if isinstance(self.rhs, ColumnOracle):
            if self.rhs.width != width:
                raise ContractError(f"rhs oracle width {self.rhs.width} does not match column width {width}")
        else:
            rhs = as_vector(self.rhs)
            if rhs.shape[0] != len(self.columns):
                raise ContractError(f"rhs vector has {rhs.shape[0]} entries, expected M = {len(self.columns)}")
            object.__setattr__(self, "rhs", rhs)

    @property
    def width(self) -> int:
        return self.columns[0].width

    @property
    def rhs_is_oracle(self) -> bool:
        return isinstance(self.rhs, ColumnOracle)

    def matrix(self) -> np.ndarray:
        return oracle_matrix(self.columns)

    def rhs_vector(self) -> np.ndarray:
        return self.rhs.vector() if isinstance(self.rhs, ColumnOracle) else self.rhs

    def resolved_metrics(self) -> SpectralMetrics:
        """Supplied metrics, or metrics of the reconstructed matrix."""
        return self.metrics if self.metrics is not None else spectral_metrics(self.matrix())

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "kind": "system",
            "columns": [c.to_dict() for c in self.columns],
            "rhs": (
                {"oracle": self.rhs.to_dict()} if isinstance(self.rhs, ColumnOracle)
                else {"vector": _encode_complex(self.rhs)}
            ),
        }
        if self.metrics is not None:
            out["metrics"] = _metrics_to_dict(self.metrics)
        return out


@dataclass(frozen=True)
class FactorizedInstance:
    """A = A₁A₂ with A₁ columns ``left`` (N-side) and A₂ rows ``‖v_j‖⟨v_j|`` from ``right``."""
    left: tuple[ColumnOracle, ...]
    right: tuple[ColumnOracle, ...]
    rhs: ColumnOracle

    def __post_init__(self) -> None:
        object.__setattr__(self, "left", tuple(self.left))
        object.__setattr__(self, "right", tuple(self.right))
        width = _check_shared_width(self.left, "left factor columns")
        _check_shared_width(self.right, "right factor rows")
        if len(self.left) != len(self.right):
            raise ContractError(
                f"inner dimensions differ: A₁ has {len(self.left)} columns, A₂ has {len(self.right)} rows"
            )
        if self.rhs.width != width:
            raise ContractError(f"rhs oracle width {self.rhs.width} does not match A₁ width {width}")

    @property
    def rank(self) -> int:
        return len(self.left)

    def left_matrix(self) -> np.ndarray:
        return oracle_matrix(self.left)

    def right_matrix(self) -> np.ndarray:
        return oracle_matrix(self.right).conj().T

    def matrix(self) -> np.ndarray:
        return self.left_matrix() @ self.right_matrix()

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": "factorized",
            "left": [c.to_dict() for c in self.left],
            "right": [c.to_dict() for c in self.right],
            "rhs": {"oracle": self.rhs.to_dict()},
        }


Instance = Union[LinearSystemInstance, FactorizedInstance]


# ── JSON ──────────────────────────────────────────────────────────────────────

def _encode_complex(v: np.ndarray) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex).reshape(-1)]


def _decode_complex(raw) -> complex:
    if isinstance(raw, (list, tuple)):
        if len(raw) != 2:
            raise ContractError(f"complex entries are [re, im] pairs, got {raw!r}")
        return complex(float(raw[0]), float(raw[1]))
    return complex(float(raw))


def _decode_vector(raw) -> np.ndarray:
    return np.array([_decode_complex(z) for z in raw], dtype=complex)


def _metrics_to_dict(m: SpectralMetrics) -> dict[str, float]:
    return {
        "spectral_norm": m.spectral_norm,
        "pinv_norm": m.pinv_norm,
        "condition_number": m.condition_number,
        "frobenius_norm": m.frobenius_norm,
    }


def instance_from_dict(data: dict[str, Any]) -> Instance:
    """Parse any of the three instance layouts, including a raw matrix."""
    try:
        if "matrix" in data:
            matrix = np.array([_decode_vector(row) for row in data["matrix"]], dtype=complex)
            return instance_from_matrix(matrix, _decode_vector(data["rhs"]), data.get("rhs_kind"))
        if data.get("kind") == "factorized":
            return FactorizedInstance(
                left=tuple(ColumnOracle.from_dict(c) for c in data["left"]),
                right=tuple(ColumnOracle.from_dict(c) for c in data["right"]),
                rhs=ColumnOracle.from_dict(data["rhs"]["oracle"]),
            )
        rhs_raw = data["rhs"]
        if "oracle" in rhs_raw:
            rhs: Rhs = ColumnOracle.from_dict(rhs_raw["oracle"])
        elif "vector" in rhs_raw:
            rhs = _decode_vector(rhs_raw["vector"])
        else:
            raise ContractError("rhs must hold either an 'oracle' or a 'vector'")
        metrics = None
        if "metrics" in data:
            metrics = SpectralMetrics(**{k: float(v) for k, v in data["metrics"].items()})
        return LinearSystemInstance(
            columns=tuple(ColumnOracle.from_dict(c) for c in data["columns"]), rhs=rhs, metrics=metrics,
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ContractError):
            raise
        raise ContractError(f"malformed instance JSON: {exc!r}") from exc


def load_instance(path: str | Path) -> Instance:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ContractError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    except OSError as exc:
        raise ContractError(f"cannot read instance file {path}: {exc.strerror}") from exc
    return instance_from_dict(data)


def dump_instance(instance: Instance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(instance.to_dict(), indent=2))


def instance_from_matrix(matrix, rhs, rhs_kind: str | None = None) -> LinearSystemInstance:
    """Turn a raw matrix into oracles; rows are zero-padded to a power of two.

    ``rhs`` of length N is the over-determined b, of length M the
    under-determined c. For square matrices pass ``rhs_kind="vector"`` to get
    the latter.
    """
    a = as_matrix(matrix)
    rhs = as_vector(rhs)
    rows, cols = a.shape
    width = max(1, ceil_log2(max(rows, 1)))
    if rhs_kind not in (None, "oracle", "vector"):
        raise ContractError(f"unknown rhs_kind '{rhs_kind}'. Valid values: oracle, vector")
    columns = tuple(ColumnOracle.from_vector(a[:, j], width) for j in range(cols))
    if rhs_kind == "vector" or (rhs_kind is None and rhs.shape[0] == cols and rhs.shape[0] != rows):
        return LinearSystemInstance(columns, rhs)
    if rhs.shape[0] != rows:
        raise ContractError(f"rhs has {rhs.shape[0]} entries; expected N = {rows} or M = {cols}")
    return LinearSystemInstance(columns, ColumnOracle.from_vector(rhs, width))


# ── Random generation ─────────────────────────────────────────────────────────

def _haar(dim: int, rng: np.random.Generator) -> np.ndarray:
    if dim == 1:
        return np.ones((1, 1), dtype=complex)
    return unitary_group.rvs(dim, random_state=rng)


def _random_unit(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_matrix(rows: int, cols: int, condition_number: float, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """rows×cols matrix with ‖A‖ = 1 and nonzero singular values spread to 1/κ."""
    if condition_number < 1:
        raise ContractError(f"condition number must be ≥ 1, got {condition_number}")
    rank = min(rows, cols) if rank is None else rank
    if not 1 <= rank <= min(rows, cols):
        raise ContractError(f"rank must lie in 1..{min(rows, cols)}, got {rank}")
    sigma = np.geomspace(1.0, 1.0 / condition_number, rank) if rank > 1 else np.ones(1)
    left = _haar(rows, rng)[:, :rank]
    right = _haar(cols, rng)[:, :rank]
    return (left * sigma) @ right.conj().T


def random_instance(
    n_qubits: int, m: int, condition_number: float = 2.0, consistent: bool = True, seed: int = 0,
) -> LinearSystemInstance:
    """Over-determined instance: N = 2**n_qubits rows, M columns, oracle rhs."""
    rows = 1 << n_qubits
    if not 1 <= m <= rows:
        raise ContractError(f"need 1 ≤ M ≤ N = {rows}, got M = {m}")
    rng = np.random.default_rng(seed)
    a = random_matrix(rows, m, condition_number, rng)
    b = a @ _random_unit(m, rng)
    if not consistent:
        # add a component outside the column space
        orth = _random_unit(rows, rng)
        orth -= a @ np.linalg.lstsq(a, orth, rcond=None)[0]
        if np.linalg.norm(orth) > 1e-12:
            b = b / np.linalg.norm(b) + orth / np.linalg.norm(orth)
    b = b / np.linalg.norm(b)
    return instance_from_matrix(a, b, "oracle")


def random_underdetermined_instance(
    n_qubits: int, m: int, condition_number: float = 2.0, seed: int = 0,
) -> LinearSystemInstance:
    """Instance for min ‖A†y − c‖ with a random classical c of length M."""
    rows = 1 << n_qubits
    if not 1 <= m <= rows:
        raise ContractError(f"need 1 ≤ M ≤ N = {rows}, got M = {m}")
    rng = np.random.default_rng(seed)
    a = random_matrix(rows, m, condition_number, rng)
    return instance_from_matrix(a, _random_unit(m, rng), "vector")


def random_factorized_instance(
    left_qubits: int,
    right_qubits: int,
    rank: int,
    condition_number: float = 2.0,
    left_rank: int | None = None,
    seed: int = 0,
) -> FactorizedInstance:
    """A = A₁A₂ with A₁ of shape N×R (rank ``left_rank``) and A₂ of full row rank R."""
    rows, cols = 1 << left_qubits, 1 << right_qubits
    if not 1 <= rank <= min(rows, cols):
        raise ContractError(f"rank must lie in 1..{min(rows, cols)}, got {rank}")
    rng = np.random.default_rng(seed)
    a1 = random_matrix(rows, rank, condition_number, rng, rank=left_rank)
    a2 = random_matrix(rank, cols, condition_number, rng)
    b = _random_unit(rows, rng)
    return FactorizedInstance(
        left=tuple(ColumnOracle.from_vector(a1[:, j], left_qubits) for j in range(rank)),
        right=tuple(ColumnOracle.from_vector(a2[j].conj(), right_qubits) for j in range(rank)),
        rhs=ColumnOracle.from_vector(b, left_qubits),
    )

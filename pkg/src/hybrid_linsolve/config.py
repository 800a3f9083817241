"""Limits, defaults and constants for the solvers and the circuit transpiler.

Simulation caps, shot and budget defaults, lattice depth constants and the
scaling-bench grid. ``settings.resolve`` falls back to these values.
"""
from __future__ import annotations

from typing import Literal

# ── Type aliases ──────────────────────────────────────────────────────────────

GateKind = Literal["H", "S", "Sdg", "X", "R", "CNOT", "SWAP", "Toffoli"]
GraphVariant = Literal["complete", "lattice", "path", "explicit"]
Construction = Literal["naive", "ancilla", "lattice"]
Part = Literal["re", "im"]
SolveMode = Literal["exact", "sampled"]

# ── Gate set ──────────────────────────────────────────────────────────────────

VALID_GATE_KINDS: frozenset[str] = frozenset({
    "H", "S", "Sdg", "X", "R", "CNOT", "SWAP", "Toffoli",
})
SINGLE_QUBIT_KINDS: frozenset[str] = frozenset({"H", "S", "Sdg", "X", "R"})
GATE_ARITY: dict[str, int] = {
    "H": 1, "S": 1, "Sdg": 1, "X": 1, "R": 1,
    "CNOT": 2, "SWAP": 2,
    "Toffoli": 3,
}
R_PARAM_COUNT: int = 5          # (theta, nx, ny, nz, phase)

# ── Depth cost model ──────────────────────────────────────────────────────────

DEFAULT_GATE_COST: int = 1
TOFFOLI_COST: int = 8           # depth of the native Toffoli under the cost model
SWAP_AS_CNOT_COST: int = 3      # one SWAP = three CNOTs

# ── Numerical tolerances ──────────────────────────────────────────────────────

RANK_TOLERANCE: float = 1e-10          # relative to the largest singular value
HERMITIAN_TOLERANCE: float = 1e-10
RANGE_TOLERANCE: float = 1e-8
UNIT_NORM_TOLERANCE: float = 1e-10
STATE_NORM_TOLERANCE: float = 1e-8
AXIS_NORM_TOLERANCE: float = 1e-9
ANGLE_EPSILON: float = 1e-13           # rotations below this angle are dropped

# ── Simulation guards ─────────────────────────────────────────────────────────

MAX_UNITARY_WIDTH: int = 12
MAX_STATEVECTOR_WIDTH: int = 24

# ── Estimation ────────────────────────────────────────────────────────────────

DEFAULT_DELTA: float = 0.01
DEFAULT_EPSILON: float = 0.1
DEFAULT_BUDGET_SCALE: float = 1.0
DEFAULT_MODE: SolveMode = "exact"
DEFAULT_CONSTRUCTION: Construction = "naive"
DEFAULT_WORKERS: int = 1
MAX_SHOTS: int = 2 ** 62           # binomial draws use 64-bit counts
IMAGINARY_RESIDUE_TOLERANCE: float = 1e-8

VALID_MODES: frozenset[str] = frozenset({"exact", "sampled"})
VALID_PARTS: frozenset[str] = frozenset({"re", "im"})
VALID_CONSTRUCTIONS: frozenset[str] = frozenset({"naive", "ancilla", "lattice"})
VALID_GRAPH_VARIANTS: frozenset[str] = frozenset({"complete", "lattice", "path", "explicit"})

# ── Lattice depth constants (asserted in tests) ──────────────────────────────

C_ROUTE: int = 3     # permutation routing: SWAP layers ≤ C_ROUTE·(l1+l2)
C_FAN: int = 24      # fan-out on the comb tree: depth ≤ C_FAN·(l1+l2)
# controlled circuit on the lattice: depth ≤ C_LAT·d·(l1+l2), d = layers after
# SWAP/Toffoli expansion; measured worst ratio 23.2 on random 3×4 and 4×4 layers
C_LAT: int = 48

# ── Shot-scaling bench ────────────────────────────────────────────────────────

BENCH_MIN_LOG_SHOTS: int = 8
BENCH_MAX_LOG_SHOTS: int = 16
BENCH_SEEDS: int = 30
BENCH_COLUMNS: int = 4
BENCH_QUBITS: int = 3           # N = 2**3

# ── CLI ───────────────────────────────────────────────────────────────────────

EXIT_OK: int = 0
EXIT_NUMERICAL: int = 1
EXIT_CONTRACT: int = 2
EXIT_RESOURCE: int = 3

CONFIG_SECTION: str = "solve"
SEED_BITS: int = 32

"""Command-line surface: click group with one subcommand per workflow.

Every subcommand resolves its parameters through ``settings.resolve`` (flag >
config file > default), prints a rich summary, and optionally writes JSON or
CSV artifacts. Package errors map onto exit statuses:

  0  success
  1  numerical failure (SVD / eigendecomposition)
  2  contract or domain error (bad input, infeasible layout)
  3  resource guard (circuit too wide to simulate)
"""
from __future__ import annotations

import csv
import json
import logging
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Callable, Iterator, Optional

import click
from rich import box
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.table import Table

from .bench import scaling_sweep
from .circuit import Circuit, GateCostModel
from .config import (
    BENCH_COLUMNS,
    BENCH_MAX_LOG_SHOTS,
    BENCH_MIN_LOG_SHOTS,
    BENCH_QUBITS,
    BENCH_SEEDS,
    EXIT_CONTRACT,
    EXIT_NUMERICAL,
    EXIT_RESOURCE,
    TOFFOLI_COST,
    VALID_CONSTRUCTIONS,
    VALID_MODES,
)
from .errors import ContractError, HybridSolverError, NumericalError, ResourceError
from .hadamard import estimate_overlap, hoeffding_radius
from .instances import (
    FactorizedInstance,
    LinearSystemInstance,
    dump_instance,
    load_instance,
    random_factorized_instance,
    random_instance,
    random_underdetermined_instance,
)
from .settings import RunInputs, RunSettings, load_config_file, resolve
from .solver import (
    SolveReport,
    solve_factorized,
    solve_factorized_relaxed,
    solve_overdetermined,
    solve_underdetermined,
)
from .transpiler import DepthReport, control_circuit, depth_report

console = Console()
err_console = Console(stderr=True, style="bold red")

logger = logging.getLogger(__name__)

_LEVELS = ("WARNING", "INFO", "DEBUG")


# ──────────────────────────────────────────────────────────────────────────────
# Plumbing
# ──────────────────────────────────────────────────────────────────────────────

def _exit_code(exc: HybridSolverError) -> int:
    if isinstance(exc, ResourceError):
        return EXIT_RESOURCE
    if isinstance(exc, NumericalError):
        return EXIT_NUMERICAL
    return EXIT_CONTRACT


@contextmanager
def _reported_errors() -> Iterator[None]:
    try:
        yield
    except HybridSolverError as exc:
        title = type(exc).__name__
        err_console.print(Panel(str(exc), title=title, expand=False, border_style="red"))
        sys.exit(_exit_code(exc))


def _configure_logging(verbose: int, file_level: Optional[str]) -> None:
    level = _LEVELS[min(verbose, len(_LEVELS) - 1)] if verbose else (file_level or "WARNING").upper()
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def _settings(ctx: click.Context, **flags: Any) -> RunSettings:
    inputs = RunInputs(**{k: v for k, v in flags.items() if k in RunInputs.__dataclass_fields__})
    return resolve(inputs, ctx.obj.get("file_values"))


def _load_circuit(path: str) -> Circuit:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ContractError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    except OSError as exc:
        raise ContractError(f"cannot read circuit file {path}: {exc.strerror}") from exc
    return Circuit.from_dict(data)


def _write_json(path: str, payload: dict[str, Any]) -> None:
    try:
        Path(path).write_text(json.dumps(payload, indent=2, ensure_ascii=False))
    except OSError as exc:
        raise ContractError(f"cannot write {path}: {exc.strerror}") from exc


def _write_csv(path: str, rows: list[dict[str, Any]]) -> None:
    if not rows:
        return
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
    except OSError as exc:
        raise ContractError(f"cannot write {path}: {exc.strerror}") from exc


def _fmt_complex(z: complex) -> str:
    re, im = round(z.real, 12) + 0.0, round(z.imag, 12) + 0.0
    return f"{re:.12g}{im:+.12g}i"


# ──────────────────────────────────────────────────────────────────────────────
# Display
# ──────────────────────────────────────────────────────────────────────────────

def display_settings(settings: RunSettings, names: tuple[str, ...]) -> None:
    t = Table(title="Parameters", box=box.SIMPLE, show_header=True, padding=(0, 2))
    t.add_column("Parameter", style="cyan")
    t.add_column("Value", justify="right")
    t.add_column("Source", style="dim")
    for name in names:
        t.add_row(name, str(getattr(settings, name)), settings.sources.get(name, ""))
    console.print(t)


def display_report(report: SolveReport) -> None:
    ok = report.residual_gap <= report.epsilon
    colour = "green" if ok else "yellow"
    console.print(Panel(
        f"[bold {colour}]{report.problem}[/bold {colour}] — mode {report.mode}, seed {report.seed}",
        expand=False,
    ))
    t = Table(box=box.SIMPLE, show_header=False, padding=(0, 2))
    t.add_column("Field", style="cyan")
    t.add_column("Value", justify="right")
    t.add_row("residual gap", f"{report.residual_gap:.3e}")
    t.add_row("ε", f"{report.epsilon:g}")
    t.add_row("λ", f"{report.lambda_used:.4g}")
    for name, shots in report.shots_used.items():
        t.add_row(f"shots/entry ({name})", str(shots))
    t.add_row("min Gram eigenvalue", f"{report.gram_min_eigenvalue:.3e}")
    if report.depth_stats:
        deepest = max(report.depth_stats, key=lambda r: r.measured_depth)
        t.add_row(f"max depth ({len(report.depth_stats)} test circuits)", str(deepest.measured_depth))
    console.print(t)

    c = Table(title="Coefficients", box=box.SIMPLE, padding=(0, 2))
    c.add_column("j", justify="right", style="dim")
    c.add_column("Re", justify="right")
    c.add_column("Im", justify="right")
    for j, z in enumerate(report.coefficients):
        c.add_row(str(j), f"{z.real:.6g}", f"{z.imag:.6g}")
    console.print(c)


def display_depth(report: DepthReport) -> None:
    t = Table(title="Depth", box=box.SIMPLE, show_header=False, padding=(0, 2))
    t.add_column("Field", style="cyan")
    t.add_column("Value", justify="right")
    t.add_row("construction", report.notes.get("construction", ""))
    t.add_row("measured depth", str(report.measured_depth))
    bound = f"{report.bound_value}  ({report.bound_formula})"
    t.add_row("upper bound", bound if report.bound_applies else f"{bound}  [dim]n/a for this cost model[/dim]")
    t.add_row("lower bound", str(report.lower_bound))
    t.add_row("connectivity", f"{report.connectivity.variant} on {report.connectivity.n} qubits")
    console.print(t)


# ──────────────────────────────────────────────────────────────────────────────
# Shared options
# ──────────────────────────────────────────────────────────────────────────────

def _strategy_options(fn: Callable) -> Callable:
    fn = click.option("--l2", type=int, default=None, help="Lattice columns")(fn)
    fn = click.option("--l1", type=int, default=None, help="Lattice rows")(fn)
    fn = click.option("--ancillas", "-s", type=int, default=None, help="Ancilla count s for the ancilla construction")(fn)
    fn = click.option(
        "--construction", "--graph", "construction", type=click.Choice(sorted(VALID_CONSTRUCTIONS)), default=None,
        help="Controlled-circuit construction",
    )(fn)
    return fn


def _solve_options(fn: Callable) -> Callable:
    fn = _strategy_options(fn)
    fn = click.option("--emit-plot", type=click.Path(dir_okay=False), default=None, help="Write the residual row as CSV")(fn)
    fn = click.option("--output", "-o", type=click.Path(dir_okay=False), default=None, help="Write the SolveReport JSON")(fn)
    fn = click.option("--workers", type=int, default=None, help="Threads for entry estimation")(fn)
    fn = click.option("--exact-diagonal/--estimate-diagonal", default=None, help="Set Gram diagonals to ‖a_j‖²")(fn)
    fn = click.option("--norm-bound", "norm_bound_x", type=float, default=None, help="Bound on the solution norm used in T")(fn)
    fn = click.option("--budget-scale", type=float, default=None, help="Multiplier on the repetition budget T")(fn)
    fn = click.option("--shots", type=int, default=None, help="Shots per entry, replacing the budget")(fn)
    fn = click.option("--seed", type=int, default=None, help="Master seed (random if omitted)")(fn)
    fn = click.option("--mode", type=click.Choice(sorted(VALID_MODES)), default=None, help="exact or sampled")(fn)
    fn = click.option("--epsilon", "-e", type=float, default=None, help="Target error ε")(fn)
    fn = click.argument("instance_path", type=click.Path(exists=True, dir_okay=False))(fn)
    return fn


_SOLVE_FIELDS = ("epsilon", "mode", "seed", "shots", "budget_scale", "construction", "workers")


def _finish_solve(report: SolveReport, settings: RunSettings, output: Optional[str], emit_plot: Optional[str]) -> None:
    display_report(report)
    if output:
        payload = report.to_dict()
        payload["settings"] = settings.to_dict()
        _write_json(output, payload)
        console.print(f"[dim]report written to {output}[/dim]")
    if emit_plot:
        _write_csv(emit_plot, [{
            "problem": report.problem,
            "epsilon": report.epsilon,
            "residual_gap": report.residual_gap,
            "lambda": report.lambda_used,
            **{f"shots_{k}": v for k, v in report.shots_used.items()},
            "seed": report.seed,
        }])


def _load_system(path: str) -> LinearSystemInstance:
    instance = load_instance(path)
    if not isinstance(instance, LinearSystemInstance):
        raise ContractError(f"{path} holds a factorized instance; use solve-factorized")
    return instance


# ──────────────────────────────────────────────────────────────────────────────
# Click entry point
# ──────────────────────────────────────────────────────────────────────────────

@click.group()
@click.option("--verbose", "-v", count=True, help="Repeat for more log output (INFO, DEBUG)")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None, help="TOML file with a [solve] table")
@click.pass_context
def main(ctx: click.Context, verbose: int, config_path: Optional[str]) -> None:
    """Hybrid quantum-classical solvers for skewed linear systems."""
    ctx.ensure_object(dict)
    with _reported_errors():
        file_values = load_config_file(config_path) if config_path else {}
    ctx.obj["file_values"] = file_values
    _configure_logging(verbose, file_values.get("log_level"))


@main.command("solve-over")
@_solve_options
@click.pass_context
def solve_over(ctx: click.Context, instance_path: str, output: Optional[str], emit_plot: Optional[str], **flags: Any) -> None:
    """Solve min ‖Ax − b‖ for a tall A with an oracle right-hand side."""
    with _reported_errors():
        settings = _settings(ctx, **flags)
        display_settings(settings, _SOLVE_FIELDS)
        report = solve_overdetermined(_load_system(instance_path), settings.solve_config())
        _finish_solve(report, settings, output, emit_plot)


@main.command("solve-under")
@_solve_options
@click.pass_context
def solve_under(ctx: click.Context, instance_path: str, output: Optional[str], emit_plot: Optional[str], **flags: Any) -> None:
    """Solve min ‖A†y − c‖ for a classical c; prints the coefficients s."""
    with _reported_errors():
        settings = _settings(ctx, **flags)
        display_settings(settings, _SOLVE_FIELDS)
        report = solve_underdetermined(_load_system(instance_path), settings.solve_config())
        _finish_solve(report, settings, output, emit_plot)


@main.command("solve-factorized")
@_solve_options
@click.option("--relaxed", is_flag=True, help="Allow a rank-deficient left factor")
@click.pass_context
def solve_factorized_cmd(
    ctx: click.Context, instance_path: str, output: Optional[str], emit_plot: Optional[str], relaxed: bool, **flags: Any,
) -> None:
    """Solve min ‖A₁A₂x − b‖ through two small pseudo-inverse stages."""
    with _reported_errors():
        settings = _settings(ctx, **flags)
        display_settings(settings, _SOLVE_FIELDS)
        instance = load_instance(instance_path)
        if not isinstance(instance, FactorizedInstance):
            raise ContractError(f"{instance_path} does not hold a factorized instance")
        solve = solve_factorized_relaxed if relaxed else solve_factorized
        _finish_solve(solve(instance, settings.solve_config()), settings, output, emit_plot)


@main.command("estimate-overlap")
@click.argument("a_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("b_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--shots", type=int, default=None, help="Shots per quadrature; 0 for the exact value")
@click.option("--seed", type=int, default=None)
@_strategy_options
@click.pass_context
def estimate_overlap_cmd(ctx: click.Context, a_path: str, b_path: str, **flags: Any) -> None:
    """Estimate ⟨0|A†B|0⟩ with the Hadamard test."""
    with _reported_errors():
        settings = _settings(ctx, **flags)
        shots = settings.shots if settings.shots is not None else 0
        estimate = estimate_overlap(_load_circuit(a_path), _load_circuit(b_path), shots, settings.seed, settings.strategy())
        console.print(_fmt_complex(estimate.value))
        if not estimate.exact:
            radius = hoeffding_radius(shots, settings.delta)
            console.print(
                f"[dim]± {estimate.standard_error:.3g} (1σ), Hoeffding radius {radius:.3g} per part "
                f"at δ = {settings.delta:g}, seed {settings.seed}[/dim]"
            )


def _cost_options(fn: Callable) -> Callable:
    fn = click.option("--swap-cost", type=int, default=1, show_default=True, help="Depth weight of a SWAP")(fn)
    fn = click.option("--toffoli-cost", type=int, default=TOFFOLI_COST, show_default=True, help="Depth weight of a Toffoli")(fn)
    return fn


def _controlled_report(ctx: click.Context, circuit_path: str, toffoli_cost: int, swap_cost: int, flags: dict[str, Any]):
    settings = _settings(ctx, **flags)
    circuit = _load_circuit(circuit_path)
    controlled = control_circuit(circuit, settings.strategy())
    report = depth_report(controlled, cost=GateCostModel(toffoli=toffoli_cost, swap=swap_cost))
    return controlled, report


@main.command("transpile")
@click.argument("circuit_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--output", "-o", type=click.Path(dir_okay=False), default=None, help="Write the controlled circuit JSON")
@click.option("--report", "report_path", type=click.Path(dir_okay=False), default=None, help="Write the DepthReport JSON")
@_strategy_options
@_cost_options
@click.pass_context
def transpile(
    ctx: click.Context, circuit_path: str, output: Optional[str], report_path: Optional[str],
    toffoli_cost: int, swap_cost: int, **flags: Any,
) -> None:
    """Build controlled-U for a circuit with the chosen construction."""
    with _reported_errors():
        controlled, report = _controlled_report(ctx, circuit_path, toffoli_cost, swap_cost, flags)
        display_depth(report)
        if output:
            _write_json(output, controlled.circuit.to_dict())
        if report_path:
            _write_json(report_path, report.to_dict())


@main.command("depth-report")
@click.argument("circuit_path", type=click.Path(exists=True, dir_okay=False))
@_strategy_options
@_cost_options
@click.pass_context
def depth_report_cmd(ctx: click.Context, circuit_path: str, toffoli_cost: int, swap_cost: int, **flags: Any) -> None:
    """Print measured depth, the applicable upper bound and the lower bound."""
    with _reported_errors():
        _, report = _controlled_report(ctx, circuit_path, toffoli_cost, swap_cost, flags)
        display_depth(report)


@main.command("scaling-bench")
@click.option("--instance", "instance_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--min-log-shots", type=int, default=BENCH_MIN_LOG_SHOTS, show_default=True)
@click.option("--max-log-shots", type=int, default=BENCH_MAX_LOG_SHOTS, show_default=True)
@click.option("--seeds", type=int, default=BENCH_SEEDS, show_default=True, help="Repetitions per shot count")
@click.option("--seed", type=int, default=None)
@click.option("--output", "-o", "--emit-plot", "output", type=click.Path(dir_okay=False), default=None,
              help="Write the log-log table as CSV")
@click.pass_context
def scaling_bench(
    ctx: click.Context, instance_path: Optional[str], min_log_shots: int, max_log_shots: int, seeds: int,
    seed: Optional[int], output: Optional[str],
) -> None:
    """Sweep shots per entry and fit the slope of the median Gram error."""
    with _reported_errors():
        settings = _settings(ctx, seed=seed)
        instance = _load_system(instance_path) if instance_path else None
        result = scaling_sweep(instance, min_log_shots, max_log_shots, seeds, settings.seed, settings.strategy())
        t = Table(title=f"Gram error vs shots (seed {settings.seed})", box=box.SIMPLE, padding=(0, 2))
        t.add_column("shots", justify="right", style="cyan")
        t.add_column("median ‖V̂−V‖", justify="right")
        t.add_column("min", justify="right", style="dim")
        t.add_column("max", justify="right", style="dim")
        for row in result.rows:
            t.add_row(str(row.shots), f"{row.median_error:.4g}", f"{row.min_error:.4g}", f"{row.max_error:.4g}")
        console.print(t)
        console.print(f"[bold]log-log slope:[/bold] {result.slope:.3f}")
        if output:
            _write_csv(output, result.to_rows())


@main.command("generate")
@click.argument("kind", type=click.Choice(["over", "under", "factorized"]))
@click.option("--qubits", "-n", type=int, default=BENCH_QUBITS, show_default=True, help="log₂ N")
@click.option("--columns", "-m", type=int, default=BENCH_COLUMNS, show_default=True, help="M, or the rank R when factorized")
@click.option("--right-qubits", type=int, default=None, help="log₂ M of the right factor (factorized)")
@click.option("--left-rank", type=int, default=None, help="Rank of A₁ (factorized)")
@click.option("--kappa", type=float, default=2.0, show_default=True, help="Condition number")
@click.option("--inconsistent", is_flag=True, help="Give b a component outside range(A)")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--output", "-o", type=click.Path(dir_okay=False), required=True)
def generate(
    kind: str, qubits: int, columns: int, right_qubits: Optional[int], left_rank: Optional[int],
    kappa: float, inconsistent: bool, seed: int, output: str,
) -> None:
    """Write a random instance JSON."""
    with _reported_errors():
        if kind == "over":
            instance = random_instance(qubits, columns, kappa, consistent=not inconsistent, seed=seed)
        elif kind == "under":
            instance = random_underdetermined_instance(qubits, columns, kappa, seed=seed)
        else:
            instance = random_factorized_instance(
                qubits, right_qubits if right_qubits is not None else qubits, columns, kappa, left_rank, seed,
            )
        try:
            dump_instance(instance, output)
        except OSError as exc:
            raise ContractError(f"cannot write {output}: {exc.strerror}") from exc
        console.print(f"[green]{kind} instance written to {output}[/green]")

"""Layered run settings: CLI flag > ``[solve]`` section of a TOML file > default.

Every resolved field records where its value came from (``flag``, ``file``,
``default``; the seed may also be ``random``) so reports can show it.
"""
from __future__ import annotations

import logging
import secrets
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

from .config import (
    CONFIG_SECTION,
    DEFAULT_BUDGET_SCALE,
    DEFAULT_CONSTRUCTION,
    DEFAULT_DELTA,
    DEFAULT_EPSILON,
    DEFAULT_MODE,
    DEFAULT_WORKERS,
    SEED_BITS,
    VALID_CONSTRUCTIONS,
    VALID_MODES,
)
from .errors import ContractError
from .solver import SolveConfig
from .transpiler import ControlStrategy

logger = logging.getLogger(__name__)

VALID_LOG_LEVELS: frozenset[str] = frozenset({"DEBUG", "INFO", "WARNING", "ERROR"})

_DEFAULTS: dict[str, Any] = {
    "epsilon": DEFAULT_EPSILON,
    "mode": DEFAULT_MODE,
    "shots": None,
    "budget_scale": DEFAULT_BUDGET_SCALE,
    "seed": None,
    "delta": DEFAULT_DELTA,
    "norm_bound_x": None,
    "construction": DEFAULT_CONSTRUCTION,
    "ancillas": 1,
    "l1": 0,
    "l2": 0,
    "workers": DEFAULT_WORKERS,
    "exact_diagonal": False,
    "log_level": "WARNING",
}

_TYPES: dict[str, tuple[type, ...]] = {
    "epsilon": (int, float),
    "mode": (str,),
    "shots": (int,),
    "budget_scale": (int, float),
    "seed": (int,),
    "delta": (int, float),
    "norm_bound_x": (int, float),
    "construction": (str,),
    "ancillas": (int,),
    "l1": (int,),
    "l2": (int,),
    "workers": (int,),
    "exact_diagonal": (bool,),
    "log_level": (str,),
}


@dataclass
class RunInputs:
    """Values given on the command line. None means 'not provided'."""
    epsilon: Optional[float] = None
    mode: Optional[str] = None
    shots: Optional[int] = None
    budget_scale: Optional[float] = None
    seed: Optional[int] = None
    delta: Optional[float] = None
    norm_bound_x: Optional[float] = None
    construction: Optional[str] = None
    ancillas: Optional[int] = None
    l1: Optional[int] = None
    l2: Optional[int] = None
    workers: Optional[int] = None
    exact_diagonal: Optional[bool] = None
    log_level: Optional[str] = None


@dataclass(frozen=True)
class RunSettings:
    epsilon: float
    mode: str
    shots: Optional[int]
    budget_scale: float
    seed: int
    delta: float
    norm_bound_x: Optional[float]
    construction: str
    ancillas: int
    l1: int
    l2: int
    workers: int
    exact_diagonal: bool
    log_level: str
    sources: dict[str, str] = field(default_factory=dict)

    def strategy(self) -> ControlStrategy:
        if self.construction == "ancilla":
            return ControlStrategy.with_ancillas(self.ancillas)
        if self.construction == "lattice":
            return ControlStrategy.lattice(self.l1, self.l2)
        return ControlStrategy.naive()

    def solve_config(self) -> SolveConfig:
        return SolveConfig(
            epsilon=self.epsilon,
            mode=self.mode,
            shot_override=self.shots,
            budget_scale=self.budget_scale,
            seed=self.seed,
            delta=self.delta,
            norm_bound_x=self.norm_bound_x,
            strategy=self.strategy(),
            workers=self.workers,
            exact_diagonal=self.exact_diagonal,
        )

    def to_dict(self) -> dict[str, Any]:
        out = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "sources"}
        out["sources"] = dict(self.sources)
        return out


def load_config_file(path: str | Path) -> dict[str, Any]:
    """Read the ``[solve]`` table of a TOML file and check its keys and types."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ContractError(f"cannot read config file {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ContractError(f"config file {path} is not valid TOML: {exc}") from exc
    section = data.get(CONFIG_SECTION, {})
    if not isinstance(section, dict):
        raise ContractError(f"[{CONFIG_SECTION}] in {path} must be a table")
    unknown = sorted(set(section) - set(_DEFAULTS))
    if unknown:
        raise ContractError(
            f"unknown key(s) {', '.join(unknown)} in [{CONFIG_SECTION}]. "
            f"Valid keys: {', '.join(sorted(_DEFAULTS))}"
        )
    for key, value in section.items():
        expected = _TYPES[key]
        if isinstance(value, bool) and bool not in expected:
            raise ContractError(f"[{CONFIG_SECTION}].{key} must not be a boolean")
        if not isinstance(value, expected):
            names = " or ".join(t.__name__ for t in expected)
            raise ContractError(f"[{CONFIG_SECTION}].{key} must be {names}, got {value!r}")
    return dict(section)


def _check_choice(name: str, value: str, valid: frozenset[str]) -> None:
    if value not in valid:
        raise ContractError(f"unknown {name} '{value}'. Valid values: {', '.join(sorted(valid))}")


def resolve(inputs: RunInputs, file_values: dict[str, Any] | None = None) -> RunSettings:
    """Merge flag values over file values over defaults."""
    file_values = file_values or {}
    sources: dict[str, str] = {}
    values: dict[str, Any] = {}
    for name, default in _DEFAULTS.items():
        flag_value = getattr(inputs, name)
        if flag_value is not None:
            values[name], sources[name] = flag_value, "flag"
        elif name in file_values:
            values[name], sources[name] = file_values[name], "file"
        else:
            values[name], sources[name] = default, "default"

    if values["seed"] is None:
        values["seed"] = secrets.randbits(SEED_BITS)
        sources["seed"] = "random"
        logger.info("no seed given; drew random seed %d", values["seed"])

    values["log_level"] = str(values["log_level"]).upper()
    _check_choice("mode", values["mode"], VALID_MODES)
    _check_choice("construction", values["construction"], VALID_CONSTRUCTIONS)
    _check_choice("log level", values["log_level"], VALID_LOG_LEVELS)
    settings = RunSettings(**values, sources=sources)
    # surfaces range errors (ε ≤ 0, bad lattice dims) before any work starts
    settings.solve_config()
    return settings

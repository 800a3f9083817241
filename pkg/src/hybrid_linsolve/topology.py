"""Qubit connectivity graphs.

Lattice qubits are linearized in snakelike order: row 0 left to right, row 1
right to left, and so on, so consecutive indices are always neighbours.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

import networkx as nx

from .config import VALID_GRAPH_VARIANTS, GraphVariant
from .errors import ContractError


def snake_index(row: int, col: int, l2: int) -> int:
    """Snakelike label of lattice cell (row, col), 0-based."""
    return row * l2 + (col if row % 2 == 0 else l2 - 1 - col)


def snake_position(index: int, l2: int) -> tuple[int, int]:
    """Inverse of :func:`snake_index`."""
    row, offset = divmod(index, l2)
    return row, (offset if row % 2 == 0 else l2 - 1 - offset)


@dataclass(frozen=True)
class ConnectivityGraph:
    variant: GraphVariant
    n: int
    l1: int = 0
    l2: int = 0
    edges: tuple[tuple[int, int], ...] = field(default=())

    # ── Constructors ──────────────────────────────────────────────────────────

    @classmethod
    def complete(cls, n: int) -> ConnectivityGraph:
        _check_count("n", n)
        return cls("complete", n)

    @classmethod
    def lattice(cls, l1: int, l2: int) -> ConnectivityGraph:
        _check_count("l1", l1)
        _check_count("l2", l2)
        return cls("lattice", l1 * l2, l1=l1, l2=l2)

    @classmethod
    def path(cls, n: int) -> ConnectivityGraph:
        _check_count("n", n)
        return cls("path", n)

    @classmethod
    def explicit(cls, n: int, edges) -> ConnectivityGraph:
        _check_count("n", n)
        normalized = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v or not (0 <= u < n and 0 <= v < n):
                raise ContractError(f"edge ({u}, {v}) is not valid for {n} vertices")
            normalized.add((min(u, v), max(u, v)))
        return cls("explicit", n, edges=tuple(sorted(normalized)))

    # ── Queries ───────────────────────────────────────────────────────────────

    @cached_property
    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        if self.variant == "complete":
            g = nx.complete_graph(self.n)
        elif self.variant == "path":
            g.add_edges_from((i, i + 1) for i in range(self.n - 1))
        elif self.variant == "lattice":
            for row in range(self.l1):
                for col in range(self.l2):
                    here = snake_index(row, col, self.l2)
                    if col + 1 < self.l2:
                        g.add_edge(here, snake_index(row, col + 1, self.l2))
                    if row + 1 < self.l1:
                        g.add_edge(here, snake_index(row + 1, col, self.l2))
        else:
            g.add_edges_from(self.edges)
        return g

    def has_edge(self, u: int, v: int) -> bool:
        if self.variant == "complete":
            return u != v and 0 <= u < self.n and 0 <= v < self.n
        return self.graph.has_edge(u, v)

    def is_connected(self) -> bool:
        return self.n <= 1 or nx.is_connected(self.graph)

    def diameter(self) -> int:
        if self.n <= 1:
            return 0
        if self.variant == "complete":
            return 1
        if self.variant == "lattice":
            return self.l1 + self.l2 - 2
        if self.variant == "path":
            return self.n - 1
        if not self.is_connected():
            raise ContractError("diameter is undefined for a disconnected graph")
        return int(nx.diameter(self.graph))

    def distances_from(self, source: int) -> dict[int, int]:
        if self.variant == "complete":
            return {v: (0 if v == source else 1) for v in range(self.n)}
        return dict(nx.single_source_shortest_path_length(self.graph, source))

    # ── JSON ──────────────────────────────────────────────────────────────────

    def to_dict(self) -> dict[str, Any]:
        if self.variant == "lattice":
            return {"variant": "lattice", "l1": self.l1, "l2": self.l2}
        if self.variant == "explicit":
            return {"variant": "explicit", "n": self.n, "edges": [list(e) for e in self.edges]}
        return {"variant": self.variant, "n": self.n}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ConnectivityGraph:
        try:
            variant = data["variant"]
            if variant not in VALID_GRAPH_VARIANTS:
                raise ContractError(
                    f"unknown graph variant '{variant}'. "
                    f"Valid values: {', '.join(sorted(VALID_GRAPH_VARIANTS))}"
                )
            if variant == "lattice":
                return cls.lattice(int(data["l1"]), int(data["l2"]))
            if variant == "explicit":
                return cls.explicit(int(data["n"]), data["edges"])
            if variant == "path":
                return cls.path(int(data["n"]))
            return cls.complete(int(data["n"]))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ContractError):
                raise
            raise ContractError(f"malformed graph JSON: {exc!r}") from exc


def _check_count(name: str, value: int) -> None:
    if int(value) < 1:
        raise ContractError(f"{name} must be ≥ 1, got {value}")

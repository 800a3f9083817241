"""Exception hierarchy shared by every module.

The CLI maps each class onto an exit status; library callers can catch the
``ValueError`` subclasses the same way they would catch a plain ValueError.
"""
from __future__ import annotations


class HybridSolverError(Exception):
    """Base class for all errors raised by this package."""


class ContractError(HybridSolverError, ValueError):
    """Raised when an input violates an operation's precondition or schema."""


class DomainError(HybridSolverError, ValueError):
    """Raised when a request is mathematically undefined (e.g. a zero matrix)."""


class ResourceError(HybridSolverError):
    """Raised when a circuit is wider than a simulation guard allows."""


class NumericalError(HybridSolverError):
    """Raised when a dense decomposition fails to converge."""

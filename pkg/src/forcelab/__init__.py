"""Finite, checkable models of tree-based forcing posets and their order-theoretic tools."""

from ._common import (
    ConstructionError,
    ForcelabError,
    FormatError,
    Policy,
    PreconditionError,
    Violation,
    clauses,
    derive_seed,
)

__version__ = "0.1.0"

__all__ = [
    "ConstructionError",
    "ForcelabError",
    "FormatError",
    "Policy",
    "PreconditionError",
    "Violation",
    "clauses",
    "derive_seed",
    "__version__",
]

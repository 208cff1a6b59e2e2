"""Shared knobs: operation budgets, float tolerance, typicality defaults.

Every enumeration in this package is bounded by an explicit operation budget
and raises BudgetExceededError *before* doing any work when the bound would
be crossed.  Nothing silently truncates.
"""

from __future__ import annotations

from dataclasses import dataclass

# Absolute tolerance for every floating-point comparison in bound checks.
DEFAULT_TOLERANCE = 1e-6

# Default operation budgets (scalar field operations, or items enumerated).
DEFAULT_POINT_BUDGET = 10**8
DEFAULT_SUBSPACE_BUDGET = 10**8
DEFAULT_MINOR_BUDGET = 10**8

# Typicality of a prime modulus q: omega(q-1) <= max(floor, c * ln ln q).
# The floor keeps small moduli from being rejected for having the handful of
# prime factors that any small number has.
DEFAULT_C_PRIME = 2.0
DEFAULT_FLOOR_THRESHOLD = 3


class BudgetExceededError(RuntimeError):
    """The requested enumeration would exceed its budget; nothing was run."""


@dataclass(frozen=True)
class Budgets:
    """Operation budgets for one run."""

    points: int = DEFAULT_POINT_BUDGET
    subspaces: int = DEFAULT_SUBSPACE_BUDGET
    minors: int = DEFAULT_MINOR_BUDGET

    def __post_init__(self) -> None:
        if self.points <= 0 or self.subspaces <= 0 or self.minors <= 0:
            raise ValueError("budgets must be positive")

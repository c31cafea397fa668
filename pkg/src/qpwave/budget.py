"""Work budgets for enumerations and tuple sums.

Every operation that enumerates lattice points or index tuples checks its
estimated work against a budget before running.  The default keeps desk-scale
scans under a minute; callers may pass an explicit ``budget=`` or change the
process-wide default.
"""

from __future__ import annotations

from .errors import BudgetError

DEFAULT_BUDGET = 10_000_000

# Hashed tuple-sum tables (meet-in-the-middle) additionally respect an entry cap.
MEMORY_ENTRY_BUDGET = 100_000_000

_default = DEFAULT_BUDGET


def get_default_budget() -> int:
    return _default


def set_default_budget(n: int) -> None:
    global _default
    if n <= 0:
        raise ValueError("budget must be positive")
    _default = int(n)


def resolve(budget: int | None) -> int:
    return _default if budget is None else int(budget)


def check(work: int, budget: int | None = None, what: str = "enumeration") -> None:
    limit = resolve(budget)
    if work > limit:
        raise BudgetError(f"{what} needs ~{work} units, budget is {limit}")


def check_memory(entries: int, what: str = "tuple table") -> None:
    if entries > MEMORY_ENTRY_BUDGET:
        raise BudgetError(
            f"{what} needs ~{entries} entries, memory cap is {MEMORY_ENTRY_BUDGET}"
        )

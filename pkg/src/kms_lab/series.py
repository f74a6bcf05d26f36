"""Truncation budgets and certified tails for exponential-type series."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .errors import BudgetExhausted

POLICIES = ("certified_tail", "fixed_order")


@dataclass(frozen=True)
class SeriesBudget:
    """Truncation order ``max_order``, target ``tolerance`` and remainder policy.

    Under ``certified_tail`` a series is accepted only once a rigorous bound on
    the discarded tail is at most ``tolerance``; under ``fixed_order`` exactly
    ``max_order`` orders are summed and the tail bound is merely reported.
    """

    max_order: int = 25
    tolerance: float = 1e-10
    remainder_policy: str = "certified_tail"

    def __post_init__(self):
        if int(self.max_order) < 0:
            raise ValueError("max_order must be non-negative")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.remainder_policy not in POLICIES:
            raise ValueError(f"remainder_policy must be one of {POLICIES}")

    def to_dict(self) -> dict:
        return asdict(self)

    def with_tolerance(self, tol: float) -> "SeriesBudget":
        return SeriesBudget(self.max_order, tol, self.remainder_policy)


def exp_tail_bound(x: float, order: int) -> float:
    """Upper bound on ``sum_{n > order} x^n / n!`` for ``x >= 0``.

    Uses the geometric majorant ``x^{N+1}/(N+1)! / (1 - x/(N+2))``; returns
    ``inf`` when it does not apply.
    """
    if x < 0:
        raise ValueError("x must be non-negative")
    if x == 0:
        return 0.0
    N = order
    if x >= N + 2:
        return math.inf
    log_first = (N + 1) * math.log(x) - math.lgamma(N + 2)
    return math.exp(log_first) / (1.0 - x / (N + 2))


def required_order(x: float, budget: SeriesBudget) -> tuple[int, float]:
    """Smallest ``N <= max_order`` with ``exp_tail_bound(x, N) <= tolerance``.

    Under ``fixed_order`` returns ``max_order`` and its tail bound.

    Raises
    ------
    BudgetExhausted
        when no admissible order exists under ``certified_tail``.
    """
    if budget.remainder_policy == "fixed_order":
        return budget.max_order, exp_tail_bound(x, budget.max_order)
    for N in range(budget.max_order + 1):
        tail = exp_tail_bound(x, N)
        if tail <= budget.tolerance:
            return N, tail
    raise BudgetExhausted(
        f"tail bound {exp_tail_bound(x, budget.max_order):.3e} > {budget.tolerance:.1e} "
        f"at order {budget.max_order} (r*t = {x:.4g})")

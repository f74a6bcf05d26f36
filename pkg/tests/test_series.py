import math

import pytest
from hypothesis import given, strategies as st

from kms_lab.errors import BudgetExhausted
from kms_lab.series import SeriesBudget, exp_tail_bound, required_order


@given(st.floats(0.01, 5.0), st.integers(5, 30))
def test_tail_bound_dominates_true_tail(x, N):
    true_tail = math.fsum(math.exp(n * math.log(x) - math.lgamma(n + 1)) for n in range(N + 1, N + 400))
    assert exp_tail_bound(x, N) >= true_tail * (1 - 1e-12)


def test_tail_bound_edge_cases():
    assert exp_tail_bound(0.0, 3) == 0.0
    assert exp_tail_bound(10.0, 5) == math.inf
    with pytest.raises(ValueError):
        exp_tail_bound(-1.0, 3)


def test_required_order_is_minimal():
    b = SeriesBudget(50, 1e-10)
    N, tail = required_order(1.0, b)
    assert tail <= 1e-10 and exp_tail_bound(1.0, N - 1) > 1e-10


def test_required_order_exhaustion_and_fixed_policy():
    with pytest.raises(BudgetExhausted):
        required_order(20.0, SeriesBudget(10, 1e-10))
    N, tail = required_order(20.0, SeriesBudget(10, 1e-10, "fixed_order"))
    assert N == 10 and tail == math.inf


def test_budget_validation():
    with pytest.raises(ValueError):
        SeriesBudget(5, 0.0)
    with pytest.raises(ValueError):
        SeriesBudget(5, 1e-3, "guess")
    assert SeriesBudget().to_dict() == {"max_order": 25, "tolerance": 1e-10,
                                        "remainder_policy": "certified_tail"}

import json
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kms_lab.errors import HypothesisViolated, RefinementOverflow
from kms_lab.exponentiable import (BUILTIN_EXAMPLES, StepFunction, combine_rearranged, convexity_probe,
                                   density_approximation, example1, example2, exponentiable_matrix,
                                   exponentiable_series, load_step_function, lp_norm_step,
                                   measurability_profile, product_rearranged, scaling_law_check,
                                   step_function_from_dict, truncate)
from kms_lab.series import SeriesBudget

mp.mp.dps = 40


def mu1(m):
    return mp.mpf(2) * m / mp.factorial(m + 1)


def mu2(m):
    return 2 * (2 * mp.e) ** (-m) * (1 - 1 / (2 * mp.e))


def level_sum(mu, lam, levels=300, power=1, scale=1):
    """sum_m mu_m (exp(lam v_m) - 1) in high precision."""
    return mp.fsum(mu(m) * mp.expm1(lam * scale * mp.mpf(m) ** power) for m in range(1, levels))


def closed_form(lam):
    return 2 * math.expm1(math.exp(lam)) * math.expm1(lam) / math.exp(lam)


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_example1_closed_form(lam):
    c = exponentiable_series(example1(), 1.0, lam)
    assert c.converges
    assert c.value == pytest.approx(closed_form(lam), rel=1e-9)
    assert c.value == pytest.approx(float(level_sum(mu1, lam)), rel=1e-12)


def test_example1_value_at_one():
    assert exponentiable_series(example1(), 1.0, 1.0).value == pytest.approx(17.89440031577, rel=1e-10)


def test_example2_converges_to_double_sum():
    c = exponentiable_series(example2(), 1.0, 1.0)
    assert c.converges
    assert c.value == pytest.approx(float(level_sum(mu2, 1.0)), rel=1e-10)
    assert c.value == pytest.approx(2 * (math.e - 1) / math.e, rel=1e-10)
    tight = exponentiable_series(example2(), 1.0, 1.0, SeriesBudget(25, 1e-14))
    assert tight.value == pytest.approx(2 * (math.e - 1) / math.e, rel=1e-13)


@pytest.mark.parametrize("f,lam", [(example2(), 2.0), (example2(2.0), 1.0)])
def test_example2_divergence_witness(f, lam):
    c = exponentiable_series(f, 1.0, lam)
    assert c.diverges and c.value is None
    assert c.divergence_witness["ratio_lower_bound"] == pytest.approx(math.e / 2, rel=1e-12)
    assert c.divergence_witness["partial_sum"] > 1e6


@pytest.mark.parametrize("p", [2.0, 3.0])
def test_p_greater_than_one_against_order_sum(p):
    f = example1().powered(1 / 3)
    c = exponentiable_series(f, p, 1.0)
    assert c.converges
    # f^{1/3} has values m^{1/3}: inner sums are sum_m m^{np/3} mu_m
    total = mp.fsum(mp.mpf(1) / mp.factorial(n) *
                    mp.fsum(mp.mpf(m) ** (mp.mpf(n) * p / 3) * mu1(m) for m in range(1, 200)) ** (mp.mpf(1) / p)
                    for n in range(1, 80))
    assert c.value == pytest.approx(float(total), rel=1e-8)


def test_lp_norms():
    assert lp_norm_step(example1(), 1.0) == pytest.approx(2 * (math.e - 1), rel=1e-12)
    ref = float(mp.sqrt(mp.fsum(m * m * mu1(m) for m in range(1, 200))))
    assert lp_norm_step(example1(), 2.0) == pytest.approx(ref, rel=1e-10)


def test_infinite_lambda():
    assert exponentiable_series(example1(), 1.0, math.inf).converges
    assert exponentiable_series(example2(), 1.0, math.inf).diverges
    assert exponentiable_series(StepFunction.finite([(3.0, 1.0)]), 1.0, math.inf).converges


def test_finite_list_exact():
    f = StepFunction.finite([(1.0, 0.5), (2.0, 0.25)])
    c = exponentiable_series(f, 1.0, 1.5)
    assert c.value == pytest.approx(0.5 * math.expm1(1.5) + 0.25 * math.expm1(3.0), rel=1e-14)
    c2 = exponentiable_series(f, 2.0, 1.0)
    ref = sum(math.sqrt(0.5 * 1 + 0.25 * 4 ** n) / math.factorial(n) for n in range(1, 60))
    assert c2.value == pytest.approx(ref, rel=1e-10)


@settings(max_examples=15)
@given(st.floats(0.1, 1.5))
def test_scaling_law(lam):
    assert scaling_law_check(example1(), lam).passed()


def test_scaling_law_divergent_side():
    assert scaling_law_check(example2(), 2.0).passed()


@given(st.lists(st.tuples(st.floats(0.01, 5.0), st.floats(0.01, 3.0)), min_size=1, max_size=6),
       st.floats(0.1, 2.0))
def test_matrix_case_matches_diagonal(levels, lam):
    s = np.array([v for v, _ in levels])
    A = np.diag(s)
    c = exponentiable_matrix(A, tau_scale=0.5, p=1.0, lam=lam)
    assert c.value == pytest.approx(0.5 * float(np.sum(np.expm1(lam * s))), rel=1e-12)
    dev, allowed = c.notes["growth"]
    assert dev <= allowed


def test_matrix_case_p2(rng):
    A = rng.standard_normal((3, 3))
    s = np.linalg.svd(A, compute_uv=False)
    c = exponentiable_matrix(A, p=2.0, lam=0.7)
    ref = sum(0.7 ** n / math.factorial(n) * math.sqrt(np.sum(s ** (2 * n))) for n in range(1, 120))
    assert c.value == pytest.approx(ref, rel=1e-10)


def test_measurability_profile():
    prof = dict(measurability_profile(example1(), [0.5, 2.5, 10.0]))
    assert prof[0.5] == pytest.approx(2.0)
    assert prof[2.5] == pytest.approx(1 / 3)
    assert prof[10.0] == pytest.approx(2 / math.factorial(11))


def test_density_approximation_decreases():
    prev = math.inf
    for cut in (5, 10, 15):
        g, resid = density_approximation(example1(), 1.0, cut)
        direct = float(mp.fsum(m * mu1(m) for m in range(cut + 1, 300)))
        assert resid == pytest.approx(direct, rel=1e-9)
        assert resid < prev
        assert g.n_levels == cut
        prev = resid
    with pytest.raises(RefinementOverflow):
        density_approximation(example1(), 1.0, 1e9)


def test_convexity_probe():
    f, g = example2(), example1(0.5)
    c = convexity_probe(f, g, 0.5)
    assert c.converges
    assert c.value <= c.notes["convex_bound"] + 1e-10
    # independent: sum over a long common refinement of truncations
    head = combine_rearranged(truncate(f, 60), truncate(g, 60), lambda a, b: 0.5 * a + 0.5 * b)
    assert exponentiable_series(head, 1.0, 1.0).value == pytest.approx(c.value, rel=1e-8)
    with pytest.raises(HypothesisViolated):
        convexity_probe(example2(2.0), g, 0.5)


def test_rearranged_product_measure_preserving():
    f = StepFunction.finite([(1.0, 1.0), (3.0, 0.5)])
    g = StepFunction.finite([(2.0, 0.75), (4.0, 0.25)])
    h = product_rearranged(f, g)
    assert h.total_measure == pytest.approx(1.5)
    # decreasing rearrangements: f* = 3 on [0,.5), 1 on [.5,1.5); g* = 4 on [0,.25), 2 on [.25,1)
    assert h.levels == ((0.0, 0.5), (2.0, 0.5), (6.0, 0.25), (12.0, 0.25))


def test_serialisation_round_trip(tmp_path):
    for f in list(BUILTIN_EXAMPLES.values()) + [StepFunction.finite([(1.0, 0.5)]), example2(2.0, 0.5)]:
        assert step_function_from_dict(f.to_dict()) == f
        assert load_step_function(json.dumps(f.to_dict())) == f
    p = tmp_path / "f.json"
    p.write_text(json.dumps(example1(3.0).to_dict()))
    assert load_step_function(str(p)) == example1(3.0)
    with pytest.raises(ValueError):
        step_function_from_dict({"kind": "closed_form", "name": "example1", "params": {"shift": 1}})


def test_certificate_json():
    c = exponentiable_series(example2(), 1.0, 2.0)
    doc = json.loads(c.to_json())
    assert doc["verdict"] == "diverges" and doc["tail_bound"] == "inf"


def test_budget_fixed_order_p2():
    c = exponentiable_series(example1(), 2.0, 0.5, SeriesBudget(3, 1e-10, "fixed_order"))
    assert c.verdict in ("converges", "inconclusive")

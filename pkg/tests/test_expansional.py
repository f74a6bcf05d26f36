import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from kms_lab.errors import BudgetExhausted, NotHermitian
from kms_lab.expansional import (OperatorPath, check_cocycle_properties, check_derivative_law,
                                 check_relative_cocycle, domination_violations, expansional,
                                 expansional_series, interchange_identity, interchange_printed_variant,
                                 relative_cocycle, relative_cocycle_oracle)
from kms_lab.linalg import random_density, random_hermitian, random_matrix
from kms_lab.modular import build_gns
from kms_lab.series import SeriesBudget

from strategies import seeds


def ode_oracle(path, t, side):
    d = path.dim

    def rhs(s, y):
        U = y.reshape(d, d)
        A = path.at([s])[0]
        return (U @ A if side == "right" else A @ U).ravel()

    sol = solve_ivp(rhs, (0, t), np.eye(d, dtype=complex).ravel(), method="DOP853", rtol=1e-13, atol=1e-13)
    return sol.y[:, -1].reshape(d, d)


def test_constant_path_is_exponential(rng):
    A = random_matrix(rng, 3, 1.0)
    for side in ("right", "left"):
        assert np.allclose(expansional(OperatorPath.constant(A), 0.7, side), sla.expm(0.7 * A), atol=1e-11)


def test_zero_path_and_zero_time(rng):
    assert np.allclose(expansional(OperatorPath.zero(3), 1.0), np.eye(3))
    A = random_matrix(rng, 2, 1.0)
    assert np.allclose(expansional(OperatorPath.constant(A), 0.0), np.eye(2))


@settings(max_examples=10)
@given(seeds, st.sampled_from(["right", "left"]))
def test_affine_path_matches_ode(seed, side):
    rng = np.random.default_rng(seed)
    path = OperatorPath.affine(random_matrix(rng, 3), random_matrix(rng, 3), T=1.0)
    assert np.allclose(expansional(path, 1.0, side), ode_oracle(path, 1.0, side), atol=1e-10)


def test_sides_differ_for_noncommuting_path(rng):
    path = OperatorPath.affine(random_matrix(rng, 3), random_matrix(rng, 3))
    assert np.linalg.norm(expansional(path, 1.0, "right") - expansional(path, 1.0, "left")) > 1e-3


def test_series_trace_and_domination(rng):
    path = OperatorPath.affine(random_matrix(rng, 3), random_matrix(rng, 3))
    res = expansional_series(path, 1.0)
    assert res.tail_bound <= 1e-10
    assert len(res.trace.term_norms) == res.order + 1
    assert domination_violations(path, 1.0, res) == []


@settings(max_examples=15)
@given(seeds, st.floats(0.05, 1.0))
def test_interchange_identity(seed, t):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, 5))
    A, B = random_hermitian(rng, d), random_hermitian(rng, d)
    assert interchange_identity(A, B, t).lhs < 1e-8


def test_interchange_printed_variant_does_not_close(rng):
    A, B = random_hermitian(rng, 3), random_hermitian(rng, 3)
    assert interchange_printed_variant(A, B, 1.0).lhs > 1e-3
    with pytest.raises(NotHermitian):
        interchange_identity(random_matrix(rng, 2, 1.0) + 3j * np.eye(2), B[:2, :2], 1.0)


@settings(max_examples=10)
@given(seeds)
def test_cocycle_properties(seed):
    rng = np.random.default_rng(seed)
    path = OperatorPath.affine(random_matrix(rng, 3), random_matrix(rng, 3), T=1.3)
    for r in check_cocycle_properties(path, 0.6, 0.7, SeriesBudget(40)):
        assert r.lhs < 1e-7, r


def test_derivative_law(rng):
    path = OperatorPath.affine(random_matrix(rng, 3), random_matrix(rng, 3), T=2.0)
    for side in ("right", "left"):
        r = check_derivative_law(path, 0.8, side=side, budget=SeriesBudget(40))
        assert r.passed(), r


def test_budget_exhausted(rng):
    big = OperatorPath.constant(30 * np.eye(2))
    with pytest.raises(BudgetExhausted):
        expansional(big, 1.0, budget=SeriesBudget(10, 1e-10))


def test_time_outside_domain(rng):
    with pytest.raises(ValueError):
        expansional(OperatorPath.affine(np.eye(2), np.eye(2), T=1.0), 2.0)


@settings(max_examples=10)
@given(seeds, st.floats(0.1, 1.0))
def test_relative_cocycle_against_oracle(seed, t):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, 5))
    ctx = build_gns(random_density(rng, d))
    Q = random_hermitian(rng, d)
    u, uh = relative_cocycle(ctx, Q, t)
    oracle, _ = relative_cocycle_oracle(ctx, Q, t)
    assert np.allclose(u, oracle, atol=1e-7)
    assert np.allclose(u @ uh, np.eye(d), atol=1e-9)


def test_relative_cocycle_direct_oracle(rng):
    """Independent check: u_t = e^{it(log rho - Q)} e^{-it log rho} up to the phase."""
    ctx = build_gns(random_density(rng, 3))
    Q = random_hermitian(rng, 3)
    L = sla.logm(ctx.rho)
    t = 0.6
    direct = sla.expm(1j * t * (L - Q)) @ sla.expm(-1j * t * L)
    u, _ = relative_cocycle(ctx, Q, t)
    assert np.allclose(u, direct, atol=1e-9)


def test_relative_cocycle_checks(rng):
    ctx = build_gns(random_density(rng, 3))
    Q = random_hermitian(rng, 3)
    reports = {r.name: r for r in check_relative_cocycle(ctx, Q, 0.7, seed=1)}
    for name, r in reports.items():
        if name != "intertwining_printed":
            assert r.passed(), r
    assert reports["intertwining_printed"].lhs > 1e-3

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, strategies as st

from kms_lab.errors import NotFaithful, NotNormalized
from kms_lab.modular import (build_gns, delta_from_polar, delta_power, j_action, kms_check, kms_deviation,
                             kms_two_point, modular_data, modular_flow, modular_residuals, s_action,
                             state_reproduction, superoperator)

from strategies import densities, matrices, seeds


def kron_delta(rho):
    """Row-major matrix of X -> rho X rho^{-1}."""
    return np.kron(rho, np.linalg.inv(rho).T)


def test_two_level_delta_spectrum():
    ctx = build_gns(np.diag([2 / 3, 1 / 3]))
    D = delta_from_polar(ctx)
    assert np.allclose(np.sort(np.diag(D).real), [0.5, 1, 1, 2], atol=1e-12)
    assert np.allclose(D, np.diag(np.diag(D)), atol=1e-12)
    grid = modular_data(ctx).delta_eigenvalues
    assert np.allclose(np.sort(grid.ravel()), [0.5, 1, 1, 2])
    assert np.allclose(grid * grid.T, 1)


@given(densities())
def test_delta_matches_kron_oracle(rho):
    ctx = build_gns(rho)
    D = superoperator(lambda X: delta_power(ctx, X, 1.0), ctx.dim)
    assert np.allclose(D, kron_delta(rho), atol=1e-10)


@given(densities())
def test_delta_from_polar_agrees(rho):
    ctx = build_gns(rho)
    assert np.allclose(delta_from_polar(ctx), kron_delta(rho), atol=1e-8)


@given(densities())
def test_modular_identities(rho):
    res = modular_residuals(build_gns(rho))
    assert res.worst() <= 1e-10, res.as_dict()


@given(densities(), matrices())
def test_tomita_on_vectors(rho, A):
    ctx = build_gns(rho)
    if A.shape[0] != ctx.dim:
        return
    X = A @ ctx.omega
    assert np.allclose(s_action(ctx, X), A.conj().T @ ctx.omega, atol=1e-9)
    assert np.allclose(j_action(delta_power(ctx, X, 0.5)), s_action(ctx, X), atol=1e-9)
    assert state_reproduction(ctx, A) < 1e-12


@given(densities(), seeds)
def test_kms_against_expm_oracle(rho, seed):
    ctx = build_gns(rho)
    rng = np.random.default_rng(seed)
    d = ctx.dim
    A = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    B = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    t = rng.uniform(-2, 2)
    h = -sla.logm(rho)
    U = lambda z: sla.expm(-1j * z * h)  # noqa: E731  rho^{iz}
    Bt = U(t) @ B @ U(-t)
    assert np.allclose(modular_flow(ctx, B, t), Bt, atol=1e-9)
    F_up = np.trace(rho @ A @ U(t - 1j) @ B @ U(-(t - 1j)))
    assert kms_two_point(ctx, A, B, t - 1j) == pytest.approx(np.trace(rho @ Bt @ A), abs=1e-9)
    assert kms_two_point(ctx, A, B, t - 1j) == pytest.approx(F_up, abs=1e-9)
    assert kms_deviation(ctx, A, B, t) < 1e-10


def test_kms_reversed_convention(rng):
    rho = np.diag([0.7, 0.2, 0.1])
    ctx = build_gns(rho, beta_convention=1)
    A = rng.standard_normal((3, 3))
    B = rng.standard_normal((3, 3))
    assert kms_deviation(ctx, A, B, 0.4) < 1e-12
    plain = build_gns(rho)
    assert np.allclose(modular_flow(ctx, B, 0.4), modular_flow(plain, B, -0.4))


def test_kms_check_reports(rng):
    reports = kms_check(build_gns(np.diag([0.5, 0.3, 0.2])), trials=25, seed=3)
    assert len(reports) == 25 and all(r.passed() for r in reports)


def test_flow_is_automorphism(rng):
    ctx = build_gns(np.diag([0.6, 0.3, 0.1]))
    A = rng.standard_normal((3, 3))
    B = rng.standard_normal((3, 3))
    t = 0.8
    assert np.allclose(modular_flow(ctx, A @ B, t), modular_flow(ctx, A, t) @ modular_flow(ctx, B, t))
    assert ctx.state(modular_flow(ctx, A, t)) == pytest.approx(ctx.state(A))


def test_construction_errors():
    with pytest.raises(NotFaithful):
        build_gns(np.diag([1.0, 0.0]))
    with pytest.raises(NotNormalized):
        build_gns(np.diag([0.5, 0.6]))
    with pytest.raises(ValueError):
        build_gns(np.diag([0.5, 0.5]), beta_convention=0)


@given(st.floats(1e-6, 0.5))
def test_nearly_pure_states_stay_accurate(eps):
    ctx = build_gns(np.diag([1 - eps, eps]))
    assert ctx.delta_grid(1.0).real.max() == pytest.approx((1 - eps) / eps, rel=1e-12)

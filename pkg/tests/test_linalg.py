import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given

from kms_lab.errors import NotHermitian, NotPositiveDefinite
from kms_lab.linalg import (as_matrix, eig_hermitian, is_hermitian, matrix_function, op_norm, polar,
                            random_density, random_unitary)

from strategies import densities, hermitians, matrices


@given(hermitians())
def test_eig_reconstructs(H):
    E = eig_hermitian(H)
    assert np.all(np.diff(E.values) >= 0)
    assert np.allclose(E.reconstruct(), H, atol=1e-12)


def test_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        eig_hermitian(np.array([[0, 1], [0, 0]], dtype=complex))


@given(hermitians())
def test_exp_matches_scipy(H):
    assert np.allclose(matrix_function(H, "exp", scale=0.7j), sla.expm(0.7j * H), atol=1e-12)


@given(densities())
def test_log_and_power_match_scipy(rho):
    assert np.allclose(matrix_function(rho, "log"), sla.logm(rho), atol=1e-9)
    assert np.allclose(matrix_function(rho, "power", s=0.5), sla.sqrtm(rho), atol=1e-10)
    assert np.allclose(matrix_function(rho, "power", s=-0.3 + 0.2j),
                       sla.expm((-0.3 + 0.2j) * sla.logm(rho)), atol=1e-8)


def test_power_on_singular_psd():
    P = np.diag([1.0, 0.0])
    assert np.allclose(matrix_function(P, "power", s=0.5), P)
    with pytest.raises(NotPositiveDefinite):
        matrix_function(P, "log")
    with pytest.raises(NotPositiveDefinite):
        matrix_function(P, "power", s=-1)


@given(matrices())
def test_polar_against_scipy(A):
    parts = polar(A)
    U, P = sla.polar(A)
    assert np.allclose(parts.modulus, P, atol=1e-10)
    assert np.allclose(parts.isometry, U, atol=1e-8)
    assert np.allclose(parts.isometry @ parts.modulus, A, atol=1e-10)


def test_polar_of_singular_matrix_is_partial_isometry():
    A = np.array([[0, 1], [0, 0]], dtype=complex)
    U = polar(A).isometry
    assert np.allclose(U @ U.conj().T @ U, U)
    assert np.allclose(U @ polar(A).modulus, A)


def test_random_helpers(rng):
    rho = random_density(rng, 4)
    assert abs(np.trace(rho) - 1) < 1e-12 and is_hermitian(rho)
    assert np.linalg.eigvalsh(rho).min() > 0
    U = random_unitary(rng, 3)
    assert np.allclose(U.conj().T @ U, np.eye(3))
    assert op_norm(U) == pytest.approx(1.0)


def test_as_matrix_validation():
    with pytest.raises(ValueError):
        as_matrix(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        as_matrix(np.array([[np.nan, 0], [0, 1]]))

"""Finite-dimensional GNS model of a faithful state and its modular objects.

The Hilbert space is the Hilbert-Schmidt space of ``d x d`` matrices with
``<X, Y> = tr(X* Y)``, the cyclic vector is ``Omega = rho^{1/2}`` and the
algebra acts by left multiplication.  In this model

* ``Delta X = rho X rho^{-1}``  (eigenvalue ``p_i / p_j`` on ``E_ij`` in the
  eigenbasis of ``rho``),
* ``J X = X*``,
* ``S X = rho^{-1/2} X* rho^{1/2} = J Delta^{1/2} X``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NotFaithful, NotNormalized
from .linalg import (HermitianEigen, POSITIVITY_FLOOR, as_matrix, dagger, eig_hermitian,
                     op_norm, polar, random_matrix)
from .reports import BoundReport, digest

NORMALIZATION_TOL = 1e-10


@dataclass(frozen=True)
class GnsContext:
    """Faithful state ``phi(A) = tr(rho A)`` with its GNS data.

    ``beta_convention`` is ``-1`` for the modular flow ``rho^{it} . rho^{-it}``
    (KMS line at ``Im z = -1``) or ``+1`` for the reversed flow
    ``rho^{-it} . rho^{it}`` (KMS line at ``Im z = +1``).
    """

    dim: int
    rho: np.ndarray
    rho_eigen: HermitianEigen
    omega: np.ndarray
    beta_convention: int = -1
    log_p: np.ndarray = field(repr=False, default=None)

    @property
    def p(self) -> np.ndarray:
        return self.rho_eigen.values

    @property
    def V(self) -> np.ndarray:
        return self.rho_eigen.vectors

    def to_eigen(self, X) -> np.ndarray:
        return dagger(self.V) @ X @ self.V

    def from_eigen(self, X) -> np.ndarray:
        return self.V @ X @ dagger(self.V)

    def state(self, A) -> complex:
        return complex(np.trace(self.rho @ A))

    def inner(self, X, Y) -> complex:
        return complex(np.vdot(X, Y))

    def delta_grid(self, z: complex = 1.0) -> np.ndarray:
        """``(p_i / p_j)^z`` as a ``d x d`` array."""
        diff = self.log_p[:, None] - self.log_p[None, :]
        return np.exp(z * diff)

    def rho_power(self, z: complex) -> np.ndarray:
        """``rho^z`` for complex ``z``."""
        return (self.V * np.exp(z * self.log_p)) @ dagger(self.V)


def build_gns(rho, beta_convention: int = -1) -> GnsContext:
    """GNS data for the density matrix ``rho``.

    Raises
    ------
    NotFaithful
        if the smallest eigenvalue is at or below the positivity floor.
    NotNormalized
        if ``|tr(rho) - 1| > 1e-10``.
    """
    if beta_convention not in (-1, 1):
        raise ValueError("beta_convention must be -1 or +1")
    rho = as_matrix(rho)
    E = eig_hermitian(rho)
    top = max(float(np.max(np.abs(E.values))), np.finfo(float).tiny)
    if E.values[0] <= POSITIVITY_FLOOR * top:
        raise NotFaithful(f"smallest eigenvalue {E.values[0]:.3e}")
    tr = float(np.sum(E.values))
    if abs(tr - 1.0) > NORMALIZATION_TOL:
        raise NotNormalized(f"trace {tr!r}")
    rho_h = E.reconstruct()
    omega = (E.vectors * np.sqrt(E.values)) @ dagger(E.vectors)
    return GnsContext(dim=rho.shape[0], rho=rho_h, rho_eigen=E, omega=omega,
                      beta_convention=beta_convention, log_p=np.log(E.values))


def delta_power(ctx: GnsContext, X, z: complex) -> np.ndarray:
    """``Delta^z X = rho^z X rho^{-z}`` through the eigen-grid."""
    return ctx.from_eigen(ctx.delta_grid(z) * ctx.to_eigen(X))


def j_action(X) -> np.ndarray:
    return dagger(np.asarray(X))


def s_action(ctx: GnsContext, X) -> np.ndarray:
    """Closed form of the Tomita operator, ``A Omega -> A* Omega``."""
    return ctx.rho_power(-0.5) @ dagger(X) @ ctx.rho_power(0.5)


@dataclass(frozen=True)
class ModularData:
    """Modular objects of a :class:`GnsContext`.

    ``delta_eigenvalues[i, j] = p_i / p_j`` is the spectrum of ``Delta`` on the
    matrix units of the eigenbasis of ``rho``.
    """

    delta_eigenvalues: np.ndarray
    delta_action: Callable
    j_action: Callable
    s_action: Callable


def modular_data(ctx: GnsContext) -> ModularData:
    return ModularData(
        delta_eigenvalues=ctx.delta_grid(1.0).real,
        delta_action=lambda X, z=1.0: delta_power(ctx, X, z),
        j_action=j_action,
        s_action=lambda X: s_action(ctx, X),
    )


def modular_flow(ctx: GnsContext, A, t: float) -> np.ndarray:
    """``tau_t(A) = rho^{it} A rho^{-it}`` (or ``tau_{-t}`` under the ``+1`` convention)."""
    s = t if ctx.beta_convention == -1 else -t
    return delta_power(ctx, as_matrix(A), 1j * s)


def kms_two_point(ctx: GnsContext, A, B, z: complex) -> complex:
    """``F(z) = tr(rho A rho^{iz} B rho^{-iz})`` (sign of ``iz`` flipped under ``+1``)."""
    s = z if ctx.beta_convention == -1 else -z
    flowed = delta_power(ctx, B, 1j * s)
    return complex(np.trace(ctx.rho @ A @ flowed))


def kms_deviation(ctx: GnsContext, A, B, t: float) -> float:
    """Largest deviation of the two KMS boundary identities at real time ``t``."""
    beta = float(ctx.beta_convention)
    Bt = modular_flow(ctx, B, t)
    lower = abs(kms_two_point(ctx, A, B, t) - ctx.state(A @ Bt))
    upper = abs(kms_two_point(ctx, A, B, t + 1j * beta) - ctx.state(Bt @ A))
    return max(lower, upper)


def kms_check(ctx: GnsContext, trials: int, seed: int, tol: float = 1e-10,
              t_range: float = 3.0) -> list[BoundReport]:
    """One report per random ``(A, B, t)``: ``lhs`` is the deviation, ``rhs`` the tolerance."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(trials):
        A = random_matrix(rng, ctx.dim)
        B = random_matrix(rng, ctx.dim)
        t = float(rng.uniform(-t_range, t_range))
        dev = kms_deviation(ctx, A, B, t)
        out.append(BoundReport("kms_boundary", dev, tol, digest(A, B, t), dim=ctx.dim,
                               indices=ctx.beta_convention, seed=seed))
    return out


# ---------------------------------------------------------------------------
# superoperators on the HS space (row-major vectorisation, vec(X) = X.ravel())

def superoperator(f: Callable, dim: int) -> np.ndarray:
    """Matrix of a complex-linear map on ``d x d`` matrices."""
    cols = []
    for k in range(dim * dim):
        E = np.zeros(dim * dim, dtype=np.complex128)
        E[k] = 1.0
        cols.append(np.asarray(f(E.reshape(dim, dim))).ravel())
    return np.stack(cols, axis=1)


def real_superoperator(f: Callable, dim: int) -> np.ndarray:
    """Matrix of a real-linear (possibly antilinear) map on the real doubling
    ``X <-> (Re vec X, Im vec X)``."""
    n = dim * dim
    cols = []
    for unit in (1.0, 1j):
        for k in range(n):
            E = np.zeros(n, dtype=np.complex128)
            E[k] = unit
            v = np.asarray(f(E.reshape(dim, dim))).ravel()
            cols.append(np.concatenate([v.real, v.imag]))
    return np.stack(cols, axis=1)


def realify(M: np.ndarray) -> np.ndarray:
    """Real doubling of a complex-linear matrix."""
    return np.block([[M.real, -M.imag], [M.imag, M.real]])


def left_multiplier(Q) -> np.ndarray:
    """``pi(Q) = Q (x) 1`` acting as ``X -> Q X``."""
    Q = as_matrix(Q)
    return np.kron(Q, np.eye(Q.shape[0]))


def j_conjugated_multiplier(Q) -> np.ndarray:
    """``J pi(Q) J`` computed directly: ``X -> (Q X*)* = X Q*``."""
    Q = as_matrix(Q)
    return superoperator(lambda X: dagger(Q @ dagger(X)), Q.shape[0])


@dataclass
class ModularResiduals:
    s_polar: float
    s_closed_form: float
    j_squared: float
    j_delta_j: float
    delta_omega: float
    j_omega: float
    polar_modulus: float
    polar_isometry: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)

    def worst(self) -> float:
        return max(self.__dict__.values())


def modular_residuals(ctx: GnsContext) -> ModularResiduals:
    """Check the modular identities on the full HS space.

    ``S`` is assembled as an explicit real-linear matrix from the defining map
    ``A Omega -> A* Omega`` (computed as ``X -> (X rho^{-1/2})* rho^{1/2}``) and
    compared with ``J Delta^{1/2}`` and with the polar decomposition of the
    assembled matrix.  Superoperator residuals are relative to
    ``max(1, ||reference||)``.
    """
    d = ctx.dim
    inv_sqrt = ctx.rho_power(-0.5)

    def S_def(X):
        A = X @ inv_sqrt
        return dagger(A) @ ctx.omega

    S_real = real_superoperator(S_def, d)
    J_real = real_superoperator(j_action, d)
    D_half = realify(superoperator(lambda X: delta_power(ctx, X, 0.5), d))
    D = realify(superoperator(lambda X: delta_power(ctx, X, 1.0), d))
    D_inv = realify(superoperator(lambda X: delta_power(ctx, X, -1.0), d))
    S_closed = real_superoperator(lambda X: s_action(ctx, X), d)

    def rel(a, ref):
        return op_norm(a) / max(1.0, op_norm(ref))

    JD = J_real @ D_half
    parts = polar(S_real)
    eye = np.eye(2 * d * d)
    return ModularResiduals(
        s_polar=rel(S_real - JD, S_real),
        s_closed_form=rel(S_real - S_closed, S_real),
        j_squared=op_norm(J_real @ J_real - eye),
        j_delta_j=rel(J_real @ D @ J_real - D_inv, D_inv),
        delta_omega=op_norm(delta_power(ctx, ctx.omega, 1.0) - ctx.omega),
        j_omega=op_norm(j_action(ctx.omega) - ctx.omega),
        polar_modulus=rel(parts.modulus - D_half, D_half),
        polar_isometry=op_norm(parts.isometry - J_real),
    )


def delta_from_polar(ctx: GnsContext) -> np.ndarray:
    """``Delta`` as a complex ``d^2 x d^2`` matrix recovered from ``|S|^2``.

    Independent of :func:`delta_power`: it only uses the defining map of ``S``.
    """
    d = ctx.dim
    inv_sqrt = ctx.rho_power(-0.5)
    S_real = real_superoperator(lambda X: dagger(X @ inv_sqrt) @ ctx.omega, d)
    mod = polar(S_real).modulus
    Dr = mod @ mod
    n = d * d
    return Dr[:n, :n] + 1j * Dr[n:, :n]


def state_reproduction(ctx: GnsContext, A) -> float:
    """``|<Omega, pi(A) Omega> - tr(rho A)|``."""
    A = as_matrix(A)
    return abs(ctx.inner(ctx.omega, A @ ctx.omega) - ctx.state(A))

"""Ordered exponentials of matrix-valued paths.

Conventions
-----------
``Exp_r`` places later times to the right and ``Exp_l`` places them to the
left::

    Exp_r(t) = 1 + sum_n  int_{t >= t_n >= ... >= t_1 >= 0} A(t_1) ... A(t_n)
    Exp_l(t) = 1 + sum_n  int_{t >= t_n >= ... >= t_1 >= 0} A(t_n) ... A(t_1)

so that ``d/dt Exp_r = Exp_r A(t)`` and ``d/dt Exp_l = A(t) Exp_l``.

The order-``n`` terms obey ``I_n(t) = int_0^t I_{n-1}(s) A(s) ds`` (right) or
``int_0^t A(s) I_{n-1}(s) ds`` (left).  They are computed panel by panel with
16-point Gauss-Legendre collocation and a spectral integration matrix; the
number of panels is doubled until two successive refinements agree to a tenth
of the tolerance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial import legendre

from .errors import BudgetExhausted, NotHermitian
from .linalg import as_matrix, dagger, eig_hermitian, is_hermitian, matrix_function, op_norm
from .modular import GnsContext, build_gns, delta_power
from .reports import BoundReport, ConvergenceTrace, digest
from .series import SeriesBudget, exp_tail_bound, required_order

GL_NODES = 16
MAX_PANELS = 1024


def _collocation(m: int = GL_NODES):
    x, w = legendre.leggauss(m)
    V = legendre.legvander(x, m - 1)
    Vint = np.empty_like(V)
    for k in range(m):
        c = np.zeros(m)
        c[k] = 1.0
        Vint[:, k] = legendre.legval(x, legendre.legint(c, lbnd=-1))
    return x, w, Vint @ np.linalg.inv(V)


_X, _W, _SINT = _collocation()


@dataclass(frozen=True)
class OperatorPath:
    """A matrix-valued path on ``[0, T]`` with ``sup_bound >= sup ||A(t)||``.

    ``evaluate_many`` maps an array of times to a ``(k, d, d)`` stack; it is
    derived from ``evaluate`` when not given.
    """

    evaluate: Callable[[float], np.ndarray]
    sup_bound: float
    dim: int
    T: float = math.inf
    evaluate_many: Callable | None = None
    label: str = "path"

    def at(self, ts) -> np.ndarray:
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        if self.evaluate_many is not None:
            return np.asarray(self.evaluate_many(ts), dtype=np.complex128)
        return np.stack([np.asarray(self.evaluate(float(t)), dtype=np.complex128) for t in ts])

    # -- constructors -----------------------------------------------------
    @classmethod
    def constant(cls, A) -> "OperatorPath":
        A = as_matrix(A)
        return cls(lambda t: A, op_norm(A), A.shape[0],
                   evaluate_many=lambda ts: np.broadcast_to(A, (len(ts),) + A.shape),
                   label="constant")

    @classmethod
    def zero(cls, dim: int) -> "OperatorPath":
        return cls.constant(np.zeros((dim, dim)))

    @classmethod
    def affine(cls, A0, A1, T: float = 1.0) -> "OperatorPath":
        """``A(t) = A0 + t A1`` on ``[0, T]``."""
        A0 = as_matrix(A0)
        A1 = as_matrix(A1)
        return cls(lambda t: A0 + t * A1, op_norm(A0) + abs(T) * op_norm(A1), A0.shape[0], T=T,
                   evaluate_many=lambda ts: A0[None] + ts[:, None, None] * A1[None],
                   label="affine")

    @classmethod
    def interaction(cls, A, B, factor: complex = 1j) -> "OperatorPath":
        """``s -> factor * e^{isB} A e^{-isB}`` for Hermitian ``B``."""
        A = as_matrix(A)
        E = eig_hermitian(B)
        At = dagger(E.vectors) @ A @ E.vectors
        lam = E.values

        def many(ts):
            ph = np.exp(1j * ts[:, None, None] * (lam[None, :, None] - lam[None, None, :]))
            return factor * (E.vectors[None] @ (ph * At[None]) @ dagger(E.vectors)[None])

        return cls(lambda t: many(np.array([t]))[0], abs(factor) * op_norm(A), A.shape[0],
                   evaluate_many=many, label="interaction")

    @classmethod
    def modular(cls, ctx: GnsContext, Q, factor: complex) -> "OperatorPath":
        """``s -> factor * rho^{is} Q rho^{-is}``."""
        Q = as_matrix(Q)
        Qt = ctx.to_eigen(Q)
        diff = ctx.log_p[:, None] - ctx.log_p[None, :]

        def many(ts):
            ph = np.exp(1j * ts[:, None, None] * diff[None])
            return factor * (ctx.V[None] @ (ph * Qt[None]) @ dagger(ctx.V)[None])

        return cls(lambda t: many(np.array([t]))[0], abs(factor) * op_norm(Q), ctx.dim,
                   evaluate_many=many, label="modular")

    def shifted(self, t0: float) -> "OperatorPath":
        """``s -> A(t0 + s)``."""
        return OperatorPath(lambda s: self.evaluate(t0 + s), self.sup_bound, self.dim,
                            T=self.T - t0,
                            evaluate_many=lambda ts: self.at(np.asarray(ts) + t0),
                            label=f"{self.label}@{t0}")

    def scaled(self, c: complex) -> "OperatorPath":
        return OperatorPath(lambda s: c * self.evaluate(s), abs(c) * self.sup_bound, self.dim,
                            T=self.T, evaluate_many=lambda ts: c * self.at(ts),
                            label=f"{c}*{self.label}")

    def spot_check(self, t: float, samples: int = 17) -> float:
        """Largest observed ``||A(s)||`` on a uniform grid of ``[0, t]``."""
        mats = self.at(np.linspace(0.0, t, samples))
        return float(max(op_norm(M) for M in mats))


def _terms_on_panels(path: OperatorPath, t: float, side: str, order: int, panels: int) -> np.ndarray:
    """``I_0(t), ..., I_order(t)`` as a ``(order+1, d, d)`` array."""
    d = path.dim
    current = np.zeros((order + 1, d, d), dtype=np.complex128)
    current[0] = np.eye(d)
    if order == 0 or t == 0:
        return current
    edges = np.linspace(0.0, t, panels + 1)
    for a, b in zip(edges[:-1], edges[1:]):
        half = 0.5 * (b - a)
        nodes = a + half * (_X + 1.0)
        A = path.at(nodes)
        prev = np.broadcast_to(np.eye(d), (GL_NODES, d, d))
        start = current.copy()
        for n in range(1, order + 1):
            integrand = prev @ A if side == "right" else A @ prev
            vals = start[n][None] + half * np.einsum("jk,kab->jab", _SINT, integrand)
            current[n] = start[n] + half * np.einsum("k,kab->ab", _W, integrand)
            prev = vals
    return current


def _check_side(side: str) -> str:
    if side in ("r", "right"):
        return "right"
    if side in ("l", "left"):
        return "left"
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


@dataclass
class ExpansionalResult:
    value: np.ndarray
    order: int
    panels: int
    tail_bound: float
    trace: ConvergenceTrace


def expansional_series(path: OperatorPath, t: float, side: str = "right",
                       budget: SeriesBudget = SeriesBudget(), panels: int | None = None) -> ExpansionalResult:
    """Ordered exponential with its per-order trace.

    ``panels`` pins the quadrature grid (no refinement) when given.

    Raises
    ------
    BudgetExhausted
        if the certified tail cannot reach the tolerance by ``max_order`` or
        the panel refinement does not settle.
    """
    side = _check_side(side)
    t = float(t)
    if t < 0 or t > path.T + 1e-15:
        raise ValueError(f"t = {t} outside [0, {path.T}]")
    x = path.sup_bound * t
    order, tail = required_order(x, budget)
    if panels is None:
        P = max(1, math.ceil(x / 2))
        terms = _terms_on_panels(path, t, side, order, P)
        while True:
            P2 = 2 * P
            finer = _terms_on_panels(path, t, side, order, P2)
            diff = op_norm(finer.sum(0) - terms.sum(0))
            terms, P = finer, P2
            if diff <= budget.tolerance / 10 * max(1.0, op_norm(terms.sum(0))):
                break
            if P >= MAX_PANELS:
                raise BudgetExhausted(f"quadrature did not settle: change {diff:.3e} at {P} panels")
    else:
        P = panels
        terms = _terms_on_panels(path, t, side, order, P)
    trace = ConvergenceTrace()
    partial = np.zeros_like(terms[0])
    for n in range(order + 1):
        partial = partial + terms[n]
        trace.append(op_norm(terms[n]), op_norm(partial), exp_tail_bound(x, n))
    return ExpansionalResult(partial, order, P, tail, trace)


def expansional(path: OperatorPath, t: float, side: str = "right",
                budget: SeriesBudget = SeriesBudget()) -> np.ndarray:
    """``Exp_r`` or ``Exp_l`` of ``path`` over ``[0, t]``."""
    return expansional_series(path, t, side, budget).value


def domination_violations(path: OperatorPath, t: float, result: ExpansionalResult,
                          rel_tol: float = 1e-9) -> list[int]:
    """Orders whose term norm exceeds ``(r t)^n / n!``."""
    x = path.sup_bound * t
    bad = []
    for n, norm in enumerate(result.trace.term_norms):
        bound = math.exp(n * math.log(x) - math.lgamma(n + 1)) if x > 0 else float(n == 0)
        if norm > bound * (1 + rel_tol) + 1e-14:
            bad.append(n)
    return bad


def _residual_report(name, residual, tol, dim, seed=None, inputs=""):
    return BoundReport(name, residual, tol, inputs, dim=dim, seed=seed)


def check_cocycle_properties(path: OperatorPath, t: float, t_prime: float,
                             budget: SeriesBudget = SeriesBudget(), seed=None) -> list[BoundReport]:
    """Inverse and composition identities.

    * ``Exp_l(-A) Exp_r(A) = 1`` and ``Exp_r(A) Exp_l(-A) = 1``
    * ``Exp_r[0, t+t'] = Exp_r[0, t] Exp_r[t, t+t']``
    * ``Exp_l[0, t+t'] = Exp_l[t, t+t'] Exp_l[0, t]``

    Each report has ``lhs`` the operator-norm residual and ``rhs`` the tolerance.
    """
    d = path.dim
    eye = np.eye(d)
    tol = budget.tolerance
    neg = path.scaled(-1.0)
    R = expansional(path, t, "right", budget)
    Ln = expansional(neg, t, "left", budget)
    R_long = expansional(path, t + t_prime, "right", budget)
    L_long = expansional(path, t + t_prime, "left", budget)
    L = expansional(path, t, "left", budget)
    sh = path.shifted(t)
    R_tail = expansional(sh, t_prime, "right", budget)
    L_tail = expansional(sh, t_prime, "left", budget)
    tag = digest(path.label, t, t_prime)
    return [
        _residual_report("inverse_left_right", op_norm(Ln @ R - eye), tol, d, seed, tag),
        _residual_report("inverse_right_left", op_norm(R @ Ln - eye), tol, d, seed, tag),
        _residual_report("composition_right", op_norm(R_long - R @ R_tail), tol, d, seed, tag),
        _residual_report("composition_left", op_norm(L_long - L_tail @ L), tol, d, seed, tag),
    ]


def check_derivative_law(path: OperatorPath, t: float, h: float = 1e-4,
                         budget: SeriesBudget = SeriesBudget(), side: str = "right",
                         seed=None) -> BoundReport:
    """Central difference of the expansional against ``Exp A(t)`` (or ``A(t) Exp``).

    The three evaluations share one quadrature grid density and truncation
    order so that discretisation error cancels in the difference.  The
    tolerance is ``max(1e-6, 10 h^2 (1 + r)^3 e^{r t})``.
    """
    side = _check_side(side)
    if h <= 0 or t - h < 0:
        raise ValueError("need 0 < h <= t")
    fine = budget.with_tolerance(min(budget.tolerance, 1e-13))
    ref = expansional_series(path, t + h, side, fine)
    plus = ref.value
    mid = expansional_series(path, t, side, fine, panels=ref.panels).value
    minus = expansional_series(path, t - h, side, fine, panels=ref.panels).value
    fd = (plus - minus) / (2 * h)
    A = path.at([t])[0]
    exact = mid @ A if side == "right" else A @ mid
    r = path.sup_bound
    tol = max(1e-6, 10 * h * h * (1 + r) ** 3 * math.exp(r * t))
    return BoundReport(f"derivative_{side}", op_norm(fd - exact), tol,
                       digest(path.label, t, h), dim=path.dim, seed=seed)


def interchange_identity(A, B, t: float, budget: SeriesBudget = SeriesBudget(), seed=None) -> BoundReport:
    """``e^{it(A+B)} e^{-itB}`` against ``Exp_r`` of ``s -> i e^{isB} A e^{-isB}``.

    ``lhs`` is the operator-norm residual, ``rhs`` the tolerance.
    """
    A = as_matrix(A)
    B = as_matrix(B)
    if not (is_hermitian(A) and is_hermitian(B)):
        raise NotHermitian("interchange identity needs Hermitian generators")
    lhs = matrix_function(A + B, "exp", scale=1j * t) @ matrix_function(B, "exp", scale=-1j * t)
    rhs = expansional(OperatorPath.interaction(A, B, 1j), t, "right", budget)
    return BoundReport("interchange", op_norm(lhs - rhs), budget.tolerance,
                       digest(A, B, t), dim=A.shape[0], seed=seed)


def interchange_printed_variant(A, B, t: float, budget: SeriesBudget = SeriesBudget(),
                                seed=None) -> BoundReport:
    """The literal alternative: ``Exp_l`` of ``s -> e^{isB} A e^{-isB}`` without ``i``.

    Reported for comparison only; it does not equal ``e^{it(A+B)} e^{-itB}``
    unless ``A = 0``.
    """
    A = as_matrix(A)
    B = as_matrix(B)
    lhs = matrix_function(A + B, "exp", scale=1j * t) @ matrix_function(B, "exp", scale=-1j * t)
    rhs = expansional(OperatorPath.interaction(A, B, 1.0), t, "left", budget)
    return BoundReport("interchange_printed", op_norm(lhs - rhs), budget.tolerance,
                       digest(A, B, t), dim=A.shape[0], seed=seed)


# ---------------------------------------------------------------------------
# relative cocycle

def relative_cocycle(ctx_psi: GnsContext, Q, t: float,
                     budget: SeriesBudget = SeriesBudget()) -> tuple[np.ndarray, np.ndarray]:
    """``u_t = Exp_r(-i tau_s(Q))`` and ``u_hat_t = Exp_l(i tau_s(Q))`` on ``[0, t]``."""
    Q = as_matrix(Q)
    if not is_hermitian(Q):
        raise NotHermitian("relative Hamiltonian must be Hermitian")
    u = expansional(OperatorPath.modular(ctx_psi, Q, -1j), t, "right", budget)
    u_hat = expansional(OperatorPath.modular(ctx_psi, Q, 1j), t, "left", budget)
    return u, u_hat


def perturbed_density(ctx: GnsContext, Q, sign: float = -1.0) -> tuple[np.ndarray, float]:
    """``(exp(log rho + sign*Q) / Z, log Z)``."""
    L = matrix_function(ctx.rho, "log", eig=ctx.rho_eigen)
    M = L + sign * as_matrix(Q)
    E = eig_hermitian(0.5 * (M + dagger(M)))
    shift = float(E.values[-1])
    w = np.exp(E.values - shift)
    logZ = shift + math.log(float(np.sum(w)))
    rho_phi = (E.vectors * (w / np.sum(w))) @ dagger(E.vectors)
    return rho_phi, logZ


def relative_cocycle_oracle(ctx_psi: GnsContext, Q, t: float) -> tuple[np.ndarray, GnsContext]:
    """``e^{i t log Z} rho_phi^{it} rho_psi^{-it}`` with ``rho_phi = e^{log rho_psi - Q} / Z``."""
    rho_phi, logZ = perturbed_density(ctx_psi, Q, -1.0)
    ctx_phi = build_gns(rho_phi)
    u = np.exp(1j * t * logZ) * ctx_phi.rho_power(1j * t) @ ctx_psi.rho_power(-1j * t)
    return u, ctx_phi


def check_relative_cocycle(ctx_psi: GnsContext, Q, t: float, s: float = 0.3,
                           budget: SeriesBudget = SeriesBudget(), seed: int = 0,
                           oracle_tol: float = 1e-7) -> list[BoundReport]:
    """Unitarity, inverse, oracle, intertwining (both variants) and cocycle law.

    Every report carries the residual as ``lhs``.  ``intertwining_printed``
    is informational and is expected to exceed its tolerance in general.
    """
    rng = np.random.default_rng(seed)
    d = ctx_psi.dim
    Q = as_matrix(Q)
    eps = budget.tolerance
    u, uh = relative_cocycle(ctx_psi, Q, t, budget)
    oracle, ctx_phi = relative_cocycle_oracle(ctx_psi, Q, t)
    eye = np.eye(d)
    A = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    tpsi = delta_power(ctx_psi, A, 1j * t)
    tphi = delta_power(ctx_phi, A, 1j * t)
    u_s, _ = relative_cocycle(ctx_psi, Q, s, budget)
    u_ts, _ = relative_cocycle(ctx_psi, Q, t + s, budget)
    tag = digest(ctx_psi.rho, Q, t)
    rep = lambda name, val, tol: BoundReport(name, val, tol, tag, dim=d, seed=seed)  # noqa: E731
    return [
        rep("cocycle_unitary", op_norm(dagger(u) @ u - eye), eps),
        rep("cocycle_inverse", max(op_norm(u @ uh - eye), op_norm(uh @ u - eye)), eps),
        rep("cocycle_adjoint", op_norm(uh - dagger(u)), eps),
        rep("cocycle_oracle", op_norm(u - oracle), oracle_tol),
        rep("intertwining", op_norm(u @ tpsi @ dagger(u) - tphi) / max(1.0, op_norm(A)), 1e-7),
        rep("intertwining_printed", op_norm(u @ tpsi - tphi @ uh) / max(1.0, op_norm(A)), 1e-7),
        rep("cocycle_law", op_norm(u_ts - u @ delta_power(ctx_psi, u_s, 1j * t)), 1e-7),
    ]

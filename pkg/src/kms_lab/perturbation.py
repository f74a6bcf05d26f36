"""Perturbed KMS vectors and multiple-time correlation bounds on a GNS model.

Vectors of the GNS space are ``d x d`` matrices (see :mod:`kms_lab.modular`).
The perturbed vector

    Phi = sum_n (-1)^n int_{1/2 >= t_1 >= ... >= t_n >= 0}
              Delta^{t_n} Q Delta^{t_{n-1} - t_n} Q ... Delta^{t_1 - t_2} Q Psi

is evaluated exactly in the eigenbasis of ``rho``.  With ``l = log p`` the
entry ``(a, j)`` of the order-``n`` term is a sum over index paths
``j = i_0 -> i_1 -> ... -> i_n = a`` of ``prod Q[i_k, i_{k-1}]`` times
``sqrt(p_j) e^{-T l_j} e^{T x}[l_{i_0}, ..., l_{i_n}]`` (a divided difference,
``T = 1/2``).  The weight only depends on the multiset of visited indices,
so paths are aggregated by their visit counts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

from .errors import DomainViolation, HypothesisViolated, NotHermitian
from .linalg import as_matrix, dagger, eig_hermitian, is_hermitian, matrix_function, op_norm
from .modular import (GnsContext, j_conjugated_multiplier, left_multiplier,
                      superoperator)
from .reports import BoundReport, ConvergenceTrace, digest
from .schatten import INF, schatten_norm, singular_values
from .series import SeriesBudget, exp_tail_bound, required_order

IM_TOL = 1e-12
CONFLUENCE_GAP = 1e-6
CANCELLATION_LIMIT = 1e-12
TAYLOR_MAX_TERMS = 400


# ---------------------------------------------------------------------------
# divided differences of the exponential

def exp_divided_difference(nodes, T: complex = 1.0) -> complex:
    """Divided difference of ``x -> exp(T x)`` at ``nodes`` (repeats allowed).

    The explicit sum ``sum_k e^{T x_k} / prod_{j != k} (x_k - x_j)`` is used
    when all nodes are at least ``1e-6`` apart and its cancellation is mild;
    otherwise the Taylor expansion about the node mean,
    ``e^{Tc} sum_k T^k / k! h_{k-n}(x - c)`` with complete homogeneous
    symmetric polynomials ``h``, is summed to convergence.
    """
    x = np.asarray(nodes, dtype=np.complex128).ravel()
    n = x.size - 1
    if n < 0:
        raise ValueError("need at least one node")
    if n == 0:
        return complex(np.exp(T * x[0]))
    diffs = x[:, None] - x[None, :]
    np.fill_diagonal(diffs, 1.0)
    gap = np.min(np.abs(diffs[~np.eye(n + 1, dtype=bool)]))
    if gap > CONFLUENCE_GAP:
        terms = np.exp(T * x) / np.prod(diffs, axis=1)
        total = complex(np.sum(terms))
        scale = float(np.sum(np.abs(terms)))
        if total != 0 and scale * np.finfo(float).eps <= CANCELLATION_LIMIT * abs(total):
            return total
    return _taylor_divided_difference(x, complex(T))


def _taylor_divided_difference(x: np.ndarray, T: complex) -> complex:
    n = x.size - 1
    c = np.mean(x)
    y = x - c
    r = float(np.max(np.abs(y)))
    aT = abs(T)
    if aT == 0:
        return complex(n == 0)
    # term m is at most |T|^n/n! * (|T| r)^m / m!; stop 40 e-folds below the first
    tr = aT * r
    m_needed = 1
    while m_needed < TAYLOR_MAX_TERMS:
        if m_needed > tr and (m_needed * math.log(tr) - math.lgamma(m_needed + 1) < -40 if tr > 0 else True):
            break
        m_needed += 1
    h = np.zeros(m_needed, dtype=np.complex128)
    h[0] = 1.0
    k = np.arange(m_needed)
    for yj in y:
        geo = yj ** k if yj != 0 else (k == 0).astype(np.complex128)
        h = np.convolve(h, geo)[:m_needed]
    kk = k + n
    coeff = np.exp(kk * np.log(complex(T)) - gammaln(kk + 1.0))
    return complex(np.exp(T * c) * np.sum(coeff * h))


def simplex_weight(mu: Sequence[complex], T: complex = 0.5) -> complex:
    """``int_{0 <= t_n <= ... <= t_1 <= T} exp(sum_k mu_k t_k) dt``.

    Equals the divided difference of ``exp(T x)`` at ``0, mu_1, mu_1 + mu_2, ...``.
    """
    mu = np.asarray(mu, dtype=np.complex128).ravel()
    if mu.size == 0:
        return 1.0
    nodes = np.concatenate([[0.0], np.cumsum(mu)])
    w = exp_divided_difference(nodes, T)
    if np.isrealobj(mu) or (np.all(mu.imag == 0) and np.imag(T) == 0):
        return float(np.real(w))
    return w


# ---------------------------------------------------------------------------
# domains and multi-time vectors

@dataclass(frozen=True)
class SimplexDomain:
    """``S^n_alpha = {t : t_i <= 0, -alpha <= sum t_i <= 0}`` (closure) and its tube."""

    n: int
    alpha: float = 0.5

    def contains(self, z: Sequence[complex], strict: bool = False) -> bool:
        im = np.imag(np.asarray(z, dtype=np.complex128))
        s = float(np.sum(im))
        if strict:
            return bool(np.all(im < 0) and -self.alpha < s < 0)
        return bool(np.all(im <= IM_TOL) and -self.alpha - IM_TOL <= s <= IM_TOL)

    def extremal_points(self, rng: np.random.Generator, count: int, re_range: float = 3.0) -> np.ndarray:
        """Points with all imaginary parts 0 except at most one equal to ``-alpha``."""
        pts = np.empty((count, self.n), dtype=np.complex128)
        for k in range(count):
            im = np.zeros(self.n)
            pattern = k % (self.n + 1)
            if pattern < self.n:
                im[pattern] = -self.alpha
            pts[k] = rng.uniform(-re_range, re_range, self.n) + 1j * im
        return pts

    def interior_points(self, rng: np.random.Generator, count: int, re_range: float = 3.0) -> np.ndarray:
        w = rng.dirichlet(np.ones(self.n + 1), size=count)[:, : self.n]
        return rng.uniform(-re_range, re_range, (count, self.n)) - 1j * self.alpha * w


@dataclass
class MultiTimeConfig:
    """Inputs of ``Delta^{i z_n} Q_n ... Delta^{i z_1} Q_1 Phi``.

    ``p`` and ``q`` are conjugate indices; ``q = inf`` gives the sharpest
    right-hand sides.
    """

    ctx: GnsContext
    Q_list: list
    z_list: list
    p: float = 1.0
    q: float = INF

    def __post_init__(self):
        self.Q_list = [as_matrix(Q) for Q in self.Q_list]
        if len(self.z_list) != len(self.Q_list):
            raise ValueError("need one time per perturbation")
        validate_times(self.z_list)

    @property
    def n(self) -> int:
        return len(self.Q_list)


def validate_times(z_list) -> None:
    im = np.imag(np.asarray(z_list, dtype=np.complex128))
    if np.any(im > IM_TOL) or np.any(im < -0.5 - IM_TOL):
        raise DomainViolation(f"imaginary parts {im.tolist()} outside [-1/2, 0]")
    s = float(np.sum(im))
    if s < -0.5 - IM_TOL:
        raise DomainViolation(f"sum of imaginary parts {s} below -1/2")


def multi_time_vector(cfg: MultiTimeConfig, z_list=None) -> np.ndarray:
    """``Delta^{i z_n} Q_n ... Delta^{i z_1} Q_1 Phi`` as a GNS-space matrix."""
    z = cfg.z_list if z_list is None else z_list
    validate_times(z)
    ctx = cfg.ctx
    X = ctx.to_eigen(ctx.omega)
    diff = ctx.log_p[:, None] - ctx.log_p[None, :]
    for Q, zj in zip(cfg.Q_list, z):
        X = np.exp(1j * zj * diff) * (ctx.to_eigen(Q) @ X)
    return ctx.from_eigen(X)


def _batched_vectors(ctx: GnsContext, Qt: list, Z: np.ndarray) -> np.ndarray:
    """Vectors for a stack of time tuples ``Z`` (shape ``(k, n)``), eigenbasis."""
    diff = ctx.log_p[:, None] - ctx.log_p[None, :]
    X = np.broadcast_to(ctx.to_eigen(ctx.omega), (Z.shape[0], ctx.dim, ctx.dim))
    for j, Q in enumerate(Qt):
        X = np.exp(1j * Z[:, j, None, None] * diff[None]) * (Q[None] @ X)
    return X


def represented_norm(Q, s: float) -> float:
    """Schatten ``s``-norm of ``pi(Q) = Q (x) 1`` on the GNS space: ``d^{1/s} ||Q||_s``."""
    Q = as_matrix(Q)
    d = Q.shape[0]
    return schatten_norm(Q, s) * (1.0 if math.isinf(s) else d ** (1.0 / s))


def _index(k: float, q: float) -> float:
    return INF if math.isinf(q) else k * q


def tr0_rhs(Q_list, q: float) -> float:
    n = len(Q_list)
    return math.prod(represented_norm(Q, _index(2 * n, q)) for Q in Q_list)


def tr1_rhs(Q_list, q: float) -> float:
    """``max_l prod_{j <= l} ||Q_j||_{4lq} prod_{j > l} ||Q_j||_{4(n-l)q}`` (``0 <= l < n``)."""
    n = len(Q_list)
    best = 0.0
    for k in range(n):
        left = math.prod(represented_norm(Q, _index(4 * k, q)) for Q in Q_list[:k])
        right = math.prod(represented_norm(Q, _index(4 * (n - k), q)) for Q in Q_list[k:])
        best = max(best, left * right)
    return best


def check_jqj_symmetry(Q, s: float, tol: float = 1e-10) -> float:
    """Relative gap between the ``s``-norms of ``pi(Q)`` and ``J pi(Q) J``."""
    L = left_multiplier(Q)
    R = j_conjugated_multiplier(Q)
    a = schatten_norm(L, s)
    b = schatten_norm(R, s)
    gap = abs(a - b) / max(1.0, a)
    if gap > tol:
        raise HypothesisViolated(f"||JQJ||_{s} = {b!r} differs from ||Q||_{s} = {a!r}")
    return gap


def sample_tube(n: int, count: int, rng: np.random.Generator, alpha: float = 0.5) -> np.ndarray:
    """Half extremal points of the closed tube, half uniform interior points."""
    dom = SimplexDomain(n, alpha)
    k_ext = count // 2
    return np.concatenate([dom.extremal_points(rng, k_ext), dom.interior_points(rng, count - k_ext)])


def check_tr_bounds(cfg: MultiTimeConfig, which: str = "TR1", samples: int = 200,
                    seed: int = 0) -> list[BoundReport]:
    """Norm bounds for the multiple-time vectors at sampled points of the tube.

    ``samples = 0`` evaluates only at ``cfg.z_list``.  For ``TR0`` two
    reports are produced per point, one per candidate right-hand side
    (``||H||_p^{1/2}`` and ``||H^{1/2}||_{2p}``; both equal 1 here because
    ``H`` is the rank-one projector onto the unit vector ``Phi``).
    """
    which = which.upper()
    if which not in ("TR0", "TR1"):
        raise ValueError("which must be TR0 or TR1")
    n = cfg.n
    q = cfg.q
    h_p = 1.0
    h_half_2p = 1.0
    if which == "TR0":
        for Q in cfg.Q_list:
            check_jqj_symmetry(Q, _index(2 * n, q))
        rhs = tr0_rhs(cfg.Q_list, q)
    else:
        rhs = tr1_rhs(cfg.Q_list, q)
    if samples:
        Z = sample_tube(n, samples, np.random.default_rng(seed))
    else:
        Z = np.asarray([cfg.z_list], dtype=np.complex128)
    Qt = [cfg.ctx.to_eigen(Q) for Q in cfg.Q_list]
    X = _batched_vectors(cfg.ctx, Qt, Z)
    norms = np.sqrt(np.sum(np.abs(X) ** 2, axis=(1, 2)))
    out = []
    tag = digest(cfg.ctx.rho, *cfg.Q_list)
    idx = (cfg.p, q)
    for k, lhs in enumerate(norms):
        if which == "TR0":
            out.append(BoundReport("TR0", lhs, h_p ** 0.5 * rhs, tag, cfg.ctx.dim, idx, seed))
            out.append(BoundReport("TR0_alt", lhs, h_half_2p * rhs, tag, cfg.ctx.dim, idx, seed))
        else:
            out.append(BoundReport("TR1", lhs, h_p ** 0.5 * rhs, tag, cfg.ctx.dim, idx, seed))
    return out


def morera_analyticity_probe(cfg: MultiTimeConfig, triangle: Sequence[complex], coord: int = -1,
                             xi=None, nodes: int = 32) -> BoundReport:
    """Contour integral of ``<xi, A^n(z) Phi>`` around a triangle in one coordinate.

    The other coordinates are taken from ``cfg.z_list``.  ``lhs`` is the
    modulus of the integral and ``rhs = 1e-8 * perimeter * max |integrand|``.
    """
    tri = [complex(v) for v in triangle]
    if len(tri) != 3:
        raise ValueError("triangle needs three vertices")
    dom = SimplexDomain(cfg.n)
    base = list(cfg.z_list)
    k = coord % cfg.n
    for v in tri:
        trial = base.copy()
        trial[k] = v
        if not dom.contains(trial, strict=True):
            raise DomainViolation(f"vertex {v} is not interior")
    if xi is None:
        rng = np.random.default_rng(12345)
        xi = rng.standard_normal((cfg.ctx.dim, cfg.ctx.dim)) + 1j * rng.standard_normal((cfg.ctx.dim,) * 2)
    x, w = np.polynomial.legendre.leggauss(nodes)
    total = 0.0 + 0.0j
    biggest = 0.0
    perimeter = 0.0
    for a, b in zip(tri, tri[1:] + tri[:1]):
        half = 0.5 * (b - a)
        zs = a + half * (x + 1.0)
        Z = np.tile(np.asarray(base, dtype=np.complex128), (nodes, 1))
        Z[:, k] = zs
        X = _batched_vectors(cfg.ctx, [cfg.ctx.to_eigen(Q) for Q in cfg.Q_list], Z)
        xi_t = cfg.ctx.to_eigen(xi)
        vals = np.einsum("ab,kab->k", np.conj(xi_t), X)
        total += half * np.sum(w * vals)
        biggest = max(biggest, float(np.max(np.abs(vals))))
        perimeter += abs(b - a)
    return BoundReport("morera", abs(total), 1e-8 * perimeter * biggest,
                       digest(cfg.ctx.rho, *cfg.Q_list, tuple(tri)), dim=cfg.ctx.dim, indices=k)


# ---------------------------------------------------------------------------
# path sums

def path_sum_terms(ctx: GnsContext, Q, T: complex, order: int, sign: float = -1.0) -> list[np.ndarray]:
    """Terms ``0..order`` (eigenbasis) of ``sum_n sign^n T^n``-type Dyson series for
    ``exp(T (log Delta + sign * pi(Q))) Omega``.

    Term ``n`` equals ``sign^n int_{T >= t_1 >= ... >= t_n >= 0}
    Delta^{t_n} Q ... Delta^{t_1 - t_2} Q Omega`` (real ``T``), extended
    analytically to complex ``T``.
    """
    d = ctx.dim
    Qt = ctx.to_eigen(as_matrix(Q))
    ell = ctx.log_p
    sqrt_p = np.sqrt(ctx.p)
    col_factor = sqrt_p * np.exp(-T * ell)
    layer = {}
    for j in range(d):
        c = [0] * d
        c[j] = 1
        M = np.zeros((d, d), dtype=np.complex128)
        M[j, j] = 1.0
        layer[tuple(c)] = M
    terms = [ctx.to_eigen(ctx.omega).astype(np.complex128)]
    dd_cache: dict = {}
    for n in range(1, order + 1):
        nxt: dict = {}
        for c, M in layer.items():
            for a in range(d):
                c2 = list(c)
                c2[a] += 1
                key = tuple(c2)
                contrib = np.zeros((d, d), dtype=np.complex128)
                contrib[a, :] = Qt[a, :] @ M
                if key in nxt:
                    nxt[key] += contrib
                else:
                    nxt[key] = contrib
        layer = nxt
        term = np.zeros((d, d), dtype=np.complex128)
        for key, M in layer.items():
            if key not in dd_cache:
                nodes = np.repeat(ell, key)
                dd_cache[key] = exp_divided_difference(nodes, T)
            term += dd_cache[key] * M
        terms.append((sign ** n) * term * col_factor[None, :])
    return terms


@dataclass
class SeriesVector:
    vector: np.ndarray
    trace: ConvergenceTrace
    order: int
    tail_bound: float
    terms: list = field(repr=False, default_factory=list)


def _require_hermitian(Q) -> np.ndarray:
    Q = as_matrix(Q)
    if not is_hermitian(Q):
        raise NotHermitian("perturbation must be Hermitian")
    return 0.5 * (Q + dagger(Q))


def _series_vector(ctx: GnsContext, Q, T: complex, sign: float, budget: SeriesBudget) -> SeriesVector:
    x = abs(T) * op_norm(Q)
    order, tail = required_order(x, budget)
    terms = path_sum_terms(ctx, Q, T, order, sign)
    trace = ConvergenceTrace()
    partial = np.zeros_like(terms[0])
    for n, term in enumerate(terms):
        partial = partial + term
        trace.append(np.linalg.norm(term), np.linalg.norm(partial), exp_tail_bound(x, n))
    return SeriesVector(ctx.from_eigen(partial), trace, order, tail, terms)


def perturbed_kms_vector(ctx: GnsContext, Q,
                         budget: SeriesBudget = SeriesBudget()) -> tuple[np.ndarray, ConvergenceTrace]:
    """Series for the perturbed vector ``Phi`` (depth 1/2) with its per-order trace.

    The certified tail after order ``N`` is ``sum_{n > N} (||Q||/2)^n / n!``.
    """
    Q = _require_hermitian(Q)
    sv = _series_vector(ctx, Q, 0.5, -1.0, budget)
    return sv.vector, sv.trace


def perturbed_vector_oracle(ctx: GnsContext, Q) -> np.ndarray:
    """``exp((log rho - Q) / 2)``, the matrix form of ``e^{(log Delta - pi(Q))/2} Omega``."""
    L = matrix_function(ctx.rho, "log", eig=ctx.rho_eigen)
    return matrix_function(L - as_matrix(Q), "exp", scale=0.5)


def perturbed_density_oracle(ctx: GnsContext, Q) -> np.ndarray:
    """``e^{-(h + Q)} / Z`` with ``h = -log rho``."""
    L = matrix_function(ctx.rho, "log", eig=ctx.rho_eigen)
    E = matrix_function(L - as_matrix(Q), "exp")
    return E / np.trace(E).real


def density_from_vector(Phi) -> np.ndarray:
    R = Phi @ dagger(Phi)
    return R / np.trace(R).real


def trace_distance(r1, r2) -> float:
    return 0.5 * float(np.sum(singular_values(np.asarray(r1) - np.asarray(r2))))


def cr1_domination(trace: ConvergenceTrace, Q, q: float = INF, rel_tol: float = 1e-9) -> list[BoundReport]:
    """``||term_n|| <= (1/2)^n/n! max{||Q||_{4q} ||Q||_{4(n-1)q}^{n-1}, ||Q||_{4nq}^n} ||H||_p^{1/2}``,
    with norms of ``pi(Q)``."""
    out = []
    for n, norm in enumerate(trace.term_norms):
        if n == 0:
            bound = 1.0
        else:
            a = represented_norm(Q, _index(4, q)) * represented_norm(Q, _index(4 * (n - 1), q)) ** (n - 1) \
                if n > 1 else represented_norm(Q, _index(4, q))
            b = represented_norm(Q, _index(4 * n, q)) ** n
            bound = 0.5 ** n / math.factorial(n) * max(a, b)
        out.append(BoundReport("CR1_domination", norm, bound * (1 + rel_tol), digest(Q, n), indices=n))
    return out


def check_cr1_interpolation(Q, n: int, q: float, zs: Sequence[float]) -> list[BoundReport]:
    """``tau(Q^{4zq})^{1/4q} tau(Q^{4(n-z)q})^{1/4q} <= ||Q||_{4q} ||Q||_{4(n-1)q}^{n-1}`` for ``Q >= 0``."""
    w = eig_hermitian(Q).values
    if w[0] < -1e-12 * max(1.0, abs(w[-1])):
        raise ValueError("Q must be positive semidefinite")
    w = np.clip(w, 0.0, None)
    s = 4 * q
    tr = lambda e: float(np.sum(w ** e))  # noqa: E731
    rhs = tr(s) ** (1 / s) * (tr((n - 1) * s) ** (1 / ((n - 1) * s))) ** (n - 1)
    out = []
    for z in zs:
        lhs = tr(z * s) ** (1 / s) * tr((n - z) * s) ** (1 / s)
        out.append(BoundReport("CR1_interpolation", lhs, rhs, digest(Q, z), dim=len(w), indices=(n, z, q)))
    return out


def perturbed_state_kms_check(ctx: GnsContext, Q, budget: SeriesBudget = SeriesBudget(),
                              trials: int = 20, seed: int = 0, tol: float = 1e-7) -> list[BoundReport]:
    """KMS identity at ``beta = +1`` for ``alpha_t(A) = e^{itK} A e^{-itK}``, ``K = -log rho + Q``,
    in the state built from the series vector, plus the trace distance to
    ``e^{-K} / Z``."""
    Q = _require_hermitian(Q)
    Phi, _ = perturbed_kms_vector(ctx, Q, budget)
    rho_q = density_from_vector(Phi)
    K = -matrix_function(ctx.rho, "log", eig=ctx.rho_eigen) + Q
    EK = eig_hermitian(K)
    rng = np.random.default_rng(seed)
    d = ctx.dim
    tag = digest(ctx.rho, Q)

    def evolve(B, z):
        U = (EK.vectors * np.exp(1j * z * EK.values)) @ dagger(EK.vectors)
        Ui = (EK.vectors * np.exp(-1j * z * EK.values)) @ dagger(EK.vectors)
        return U @ B @ Ui

    out = []
    for _ in range(trials):
        A = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        B = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        A /= op_norm(A)
        B /= op_norm(B)
        t = float(rng.uniform(-2.0, 2.0))
        F_upper = np.trace(rho_q @ A @ evolve(B, t + 1j))
        rhs_val = np.trace(rho_q @ evolve(B, t) @ A)
        dev = abs(F_upper - rhs_val)
        out.append(BoundReport("perturbed_kms", dev, tol, tag, dim=d, seed=seed))
    dist = trace_distance(rho_q, perturbed_density_oracle(ctx, Q))
    out.append(BoundReport("perturbed_state_trace_distance", dist, tol, tag, dim=d, seed=seed))
    return out


def analytic_exponential_series(ctx: GnsContext, Q, z: complex,
                                budget: SeriesBudget = SeriesBudget()) -> SeriesVector:
    """Path-sum series for ``exp(z (log Delta + pi(Q))) Omega``."""
    z = complex(z)
    if not 0 < z.real < 0.5:
        raise DomainViolation(f"Re z = {z.real} outside (0, 1/2)")
    Q = _require_hermitian(Q)
    return _series_vector(ctx, Q, z, 1.0, budget)


def gns_generator(ctx: GnsContext, Q) -> np.ndarray:
    """``log Delta + pi(Q)`` as a ``d^2 x d^2`` matrix (row-major vectorisation)."""
    d = ctx.dim
    K = superoperator(lambda X: ctx.from_eigen((ctx.log_p[:, None] - ctx.log_p[None, :]) * ctx.to_eigen(X)), d)
    return K + left_multiplier(Q)


def analytic_exponential_oracle(ctx: GnsContext, Q, z: complex) -> np.ndarray:
    G = gns_generator(ctx, as_matrix(Q))
    v = expm(complex(z) * G) @ ctx.omega.ravel()
    return v.reshape(ctx.dim, ctx.dim)


def analytic_exponential_identity(ctx: GnsContext, Q, z: complex,
                                  budget: SeriesBudget = SeriesBudget(), tol: float = 1e-6) -> BoundReport:
    """Residual between the series and the matrix exponential on the GNS space."""
    sv = analytic_exponential_series(ctx, Q, z, budget)
    ref = analytic_exponential_oracle(ctx, Q, z)
    return BoundReport("analytic_exponential", np.linalg.norm(sv.vector - ref), tol,
                       digest(ctx.rho, Q, z), dim=ctx.dim, indices=str(complex(z)))


def analytic_exponential_printed_variant(ctx: GnsContext, Q, z: complex, order: int = 20,
                                         tol: float = 1e-6) -> BoundReport:
    """The literal alternative ``sum_n (z/2)^n int_{S^n_{1/2}} ...`` against the same oracle.

    Informational: for ``Q`` commuting with ``rho`` it sums to ``e^{zQ/4} Omega``,
    not ``e^{zQ} Omega``.
    """
    z = complex(z)
    if not 0 < z.real < 0.5:
        raise DomainViolation(f"Re z = {z.real} outside (0, 1/2)")
    Q = _require_hermitian(Q)
    terms = path_sum_terms(ctx, Q, 0.5, order, 1.0)
    vec = ctx.from_eigen(sum((z / 2) ** n * t for n, t in enumerate(terms)))
    ref = analytic_exponential_oracle(ctx, Q, z)
    return BoundReport("analytic_exponential_printed", np.linalg.norm(vec - ref), tol,
                       digest(ctx.rho, Q, z), dim=ctx.dim, indices=str(z))


def spectral_cut(Q, k: float) -> np.ndarray:
    """Drop the eigencomponents of ``Q`` with ``|lambda| > k``."""
    E = eig_hermitian(Q)
    keep = np.abs(E.values) <= k * (1 + 1e-12) + 1e-15
    return (E.vectors[:, keep] * E.values[keep]) @ dagger(E.vectors[:, keep])


def approximation_stability(ctx: GnsContext, Q, cuts: Sequence[float],
                            budget: SeriesBudget = SeriesBudget()) -> ConvergenceTrace:
    """Vector differences for spectral truncations ``Q_k`` of ``Q``.

    Row ``i`` of the returned trace refers to ``cuts[i]``: ``term_norm`` is
    ``||Phi(Q_k) - Phi(Q)||``, ``partial_norm`` is ``||Phi(Q_k)||`` and
    ``certified_tail`` the sum of the two series' tail bounds.
    """
    cuts = list(cuts)
    if any(b <= a for a, b in zip(cuts, cuts[1:])):
        raise ValueError("cuts must be increasing")
    Q = _require_hermitian(Q)
    full = _series_vector(ctx, Q, 0.5, -1.0, budget)
    trace = ConvergenceTrace()
    for k in cuts:
        Qk = spectral_cut(Q, k)
        sv = _series_vector(ctx, Qk, 0.5, -1.0, budget)
        trace.append(np.linalg.norm(sv.vector - full.vector), np.linalg.norm(sv.vector),
                     sv.tail_bound + full.tail_bound)
    return trace


def stability_reports(trace: ConvergenceTrace, top_tol: float = 1e-8) -> list[BoundReport]:
    """Reports for a stability trace: one ``stability_step`` per consecutive
    pair (``lhs`` the later difference, ``rhs`` the earlier) and a final
    ``stability_limit`` (``lhs`` the top-cut difference, ``rhs = top_tol``)."""
    diffs = trace.term_norms
    out = [BoundReport("stability_step", b, a, indices=i + 1)
           for i, (a, b) in enumerate(zip(diffs, diffs[1:]))]
    out.append(BoundReport("stability_limit", diffs[-1], top_tol, indices=len(diffs) - 1))
    return out

"""Schatten (noncommutative L_p) norms over a matrix algebra with its trace,
together with executable trace inequalities.

Indices are plain floats in ``[1, inf]``; ``math.inf`` denotes the operator
norm.  Every ``check_*`` function returns a :class:`~kms_lab.reports.BoundReport`
whose slack is ``rhs - lhs``.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import IndexMismatch, IndexOrdering, ZeroInput
from .linalg import as_matrix, dagger, matrix_function
from .reports import BoundReport, digest

INF = math.inf
ZERO_SV_REL = 1e-14
INDEX_TOL = 1e-12


def _check_index(p: float) -> float:
    p = float(p)
    if not p >= 1:
        raise ValueError(f"Schatten index must be >= 1, got {p}")
    return p


def inv(p: float) -> float:
    return 0.0 if math.isinf(p) else 1.0 / p


def conjugate_index(p: float) -> float:
    p = _check_index(p)
    if p == 1:
        return INF
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def singular_values(A) -> np.ndarray:
    """Singular values in descending order with negligible ones set to zero."""
    s = np.linalg.svd(np.asarray(A, dtype=np.complex128), compute_uv=False)
    if s.size and s[0] > 0:
        s = np.where(s > ZERO_SV_REL * s[0], s, 0.0)
    return s


def norm_from_singular_values(s: np.ndarray, p: float) -> float:
    if s.size == 0 or s[0] == 0:
        return 0.0
    if math.isinf(p):
        return float(s[0])
    # scale by the largest value to avoid overflow for large p
    top = s[0]
    return float(top * np.sum((s / top) ** p) ** (1.0 / p))


def schatten_norm(A, p: float) -> float:
    """``(sum_i sigma_i^p)^(1/p)``; the largest singular value when ``p = inf``."""
    p = _check_index(p)
    return norm_from_singular_values(singular_values(as_matrix(A)), p)


def batched_schatten_norms(As: np.ndarray, p: float) -> np.ndarray:
    """Schatten norms of a stack of matrices with shape ``(k, d, d)``."""
    s = np.linalg.svd(As, compute_uv=False)
    top = s[:, :1]
    safe = np.where(top > 0, top, 1.0)
    s = np.where(s > ZERO_SV_REL * top, s, 0.0)
    if math.isinf(p):
        return s[:, 0]
    return np.where(top[:, 0] > 0, safe[:, 0] * np.sum((s / safe) ** p, axis=1) ** (1.0 / p), 0.0)


def trace_abs_power(A, p: float) -> float:
    """``tau(|A|^p)`` for finite ``p``."""
    s = singular_values(as_matrix(A))
    return float(np.sum(s ** p))


def weighted_functional(H, A) -> complex:
    """``tau_H(A)``.

    For positive ``A`` the symmetric form ``tau(H^{1/2} A H^{1/2})`` is used,
    otherwise ``tau(H A)``; the two agree whenever both are defined.
    """
    H = as_matrix(H)
    A = as_matrix(A)
    if _is_psd(A):
        R = matrix_function(H, "power", 0.5)
        return complex(np.trace(R @ A @ R))
    return complex(np.trace(H @ A))


def _is_psd(A: np.ndarray, tol: float = 1e-12) -> bool:
    if np.linalg.norm(A - dagger(A)) > tol * max(1.0, np.linalg.norm(A)):
        return False
    w = np.linalg.eigvalsh(0.5 * (A + dagger(A)))
    return bool(w[0] >= -tol * max(1.0, abs(w[-1])))


def _index_sum_check(indices: Sequence[float], target: float, what: str) -> None:
    total = sum(inv(_check_index(p)) for p in indices)
    if abs(total - target) > INDEX_TOL:
        raise IndexMismatch(f"{what}: sum of 1/p_i = {total!r}, expected {target!r}")


def check_holder(As: Sequence[np.ndarray], ps: Sequence[float], seed=None) -> BoundReport:
    """k-factor Hölder: ``tau|A_1...A_k| <= prod_i ||A_i||_{p_i}``, ``sum 1/p_i = 1``."""
    if len(As) != len(ps) or not As:
        raise IndexMismatch("need one index per factor")
    _index_sum_check(ps, 1.0, "Hölder")
    mats = [as_matrix(A) for A in As]
    prod = mats[0]
    for M in mats[1:]:
        prod = prod @ M
    lhs = schatten_norm(prod, 1.0)
    rhs = math.prod(schatten_norm(M, p) for M, p in zip(mats, ps))
    return BoundReport("holder", lhs, rhs, digest(*mats, tuple(ps)),
                       dim=mats[0].shape[0], indices=tuple(ps), seed=seed)


def check_three_term_holder(A, B, p: float, q: float, r: float, seed=None) -> BoundReport:
    """``||AB||_r <= ||A||_p ||B||_q`` for ``1/p + 1/q = 1/r``."""
    for x in (p, q, r):
        _check_index(x)
    if abs(inv(p) + inv(q) - inv(r)) > INDEX_TOL:
        raise IndexMismatch(f"1/{p} + 1/{q} != 1/{r}")
    A = as_matrix(A)
    B = as_matrix(B)
    lhs = schatten_norm(A @ B, r)
    rhs = schatten_norm(A, p) * schatten_norm(B, q)
    return BoundReport("holder3", lhs, rhs, digest(A, B, (p, q, r)),
                       dim=A.shape[0], indices=(p, q, r), seed=seed)


def check_minkowski(A, B, p: float, seed=None) -> BoundReport:
    A = as_matrix(A)
    B = as_matrix(B)
    lhs = schatten_norm(A + B, p)
    rhs = schatten_norm(A, p) + schatten_norm(B, p)
    return BoundReport("minkowski", lhs, rhs, digest(A, B, p), dim=A.shape[0], indices=p, seed=seed)


def interpolation_rhs(norm_p: float, norm_q: float, p: float, r: float, q: float) -> float:
    """Log-convex interpolation bound for ``||A||_r`` from ``||A||_p`` and ``||A||_q``."""
    if math.isinf(q):
        a, b = p / r, 1.0 - p / r
    else:
        a = p / (q - p) * (q / r - 1.0)
        b = q / (q - p) * (1.0 - p / r)
    if norm_p == 0 or norm_q == 0:
        return 0.0
    return float(norm_p ** a * norm_q ** b)


def check_interpolation(A, p: float, r: float, q: float, seed=None) -> BoundReport:
    """``||A||_r <= ||A||_p^a ||A||_q^b`` for ``1 <= p < r < q <= inf``."""
    for x in (p, r, q):
        _check_index(x)
    if not (p < r < q):
        raise IndexOrdering(f"need p < r < q, got {p}, {r}, {q}")
    A = as_matrix(A)
    s = singular_values(A)
    lhs = norm_from_singular_values(s, r)
    rhs = interpolation_rhs(norm_from_singular_values(s, p), norm_from_singular_values(s, q), p, r, q)
    return BoundReport("interpolation", lhs, rhs, digest(A, (p, r, q)),
                       dim=A.shape[0], indices=(p, r, q), seed=seed)


def dual_witness(A, p: float, q: float | None = None) -> tuple[np.ndarray, float]:
    """Norming element for the pairing ``B -> tau(AB)``.

    Returns ``(B, attained)`` with ``||B||_q <= 1`` and
    ``tau(AB) = attained = ||A||_p``.  With ``A = W S V*`` (SVD) the witness
    is ``V S^{p-1} W* / ||A||_p^{p-1}``; for ``p = 1`` it is the unitary
    ``V W*`` and for ``p = inf`` the rank-one ``v_1 w_1*``.
    """
    p = _check_index(p)
    if q is None:
        q = conjugate_index(p)
    if abs(inv(p) + inv(q) - 1.0) > INDEX_TOL:
        raise IndexMismatch(f"{p} and {q} are not conjugate")
    A = as_matrix(A)
    W, s, Vh = np.linalg.svd(A)
    if s[0] == 0 or not np.any(A):
        raise ZeroInput("dual witness of the zero matrix")
    s = np.where(s > ZERO_SV_REL * s[0], s, 0.0)
    V = dagger(Vh)
    Wh = dagger(W)
    if p == 1:
        B = V @ Wh
    elif math.isinf(p):
        B = np.outer(V[:, 0], Wh[0, :])
    else:
        norm = norm_from_singular_values(s, p)
        weights = (s / norm) ** (p - 1.0)
        B = (V * weights) @ Wh
    attained = float(np.real(np.trace(A @ B)))
    return B, attained


def growth_envelope_ok(A, n: int = 64, slack: float = 1e-9) -> tuple[float, float]:
    """Return ``(|tau(|A|^n)^{1/n} - ||A||| , allowed)`` for the growth-law check."""
    s = singular_values(as_matrix(A))
    top = float(s[0]) if s.size else 0.0
    if top == 0:
        return 0.0, slack
    root = norm_from_singular_values(s, float(n))
    dim = s.size
    return abs(root - top), top * (dim ** (1.0 / n) - 1.0) + slack

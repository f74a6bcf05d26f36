"""Dense complex linear algebra substrate.

Matrices are plain ``numpy`` arrays of dtype ``complex128``; :func:`as_matrix`
validates shape and finiteness.  Spectral calculus goes through
:func:`eig_hermitian`, so every matrix function shares the same sorted,
phase-fixed eigenbasis.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure, NotHermitian, NotPositiveDefinite

HERMITIAN_TOL = 1e-10
POSITIVITY_FLOOR = 1e-12


def as_matrix(A) -> np.ndarray:
    """Return ``A`` as a square, finite complex128 array."""
    M = np.asarray(A, dtype=np.complex128)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise ValueError(f"expected a non-empty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


def dagger(A: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(A, -1, -2))


def op_norm(A: np.ndarray) -> float:
    """Operator norm (largest singular value)."""
    A = np.asarray(A)
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def is_hermitian(A: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return op_norm(A - dagger(A)) <= tol * max(1.0, op_norm(A))


@dataclass(frozen=True)
class HermitianEigen:
    """Spectral resolution ``A = V diag(values) V*`` with ascending values."""

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ dagger(self.vectors)

    def apply(self, f) -> np.ndarray:
        """``f`` applied on the spectrum; ``f`` acts elementwise on ``values``."""
        fv = np.asarray(f(self.values), dtype=np.complex128)
        return (self.vectors * fv) @ dagger(self.vectors)


def _fix_phases(V: np.ndarray) -> np.ndarray:
    V = V.copy()
    for k in range(V.shape[1]):
        col = V[:, k]
        scale = np.max(np.abs(col))
        idx = int(np.argmax(np.abs(col) > 1e-8 * scale))
        z = col[idx]
        if z != 0:
            V[:, k] = col * (np.conj(z) / abs(z))
    return V


def eig_hermitian(A, tol: float = HERMITIAN_TOL) -> HermitianEigen:
    """Eigendecomposition of a Hermitian matrix.

    Eigenvalues are returned in ascending order; each eigenvector has its
    first non-negligible component made real and positive so that the
    decomposition is reproducible.

    Raises
    ------
    NotHermitian
        if ``||A - A*||`` exceeds ``tol * max(1, ||A||)``.
    ConvergenceFailure
        if LAPACK fails to converge.
    """
    A = as_matrix(A)
    if not is_hermitian(A, tol):
        raise NotHermitian(f"||A - A*|| = {op_norm(A - dagger(A)):.3e}")
    H = 0.5 * (A + dagger(A))
    try:
        w, V = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ConvergenceFailure(str(exc)) from exc
    order = np.argsort(w, kind="stable")
    return HermitianEigen(values=w[order], vectors=_fix_phases(V[:, order]))


def _positivity_floor(values: np.ndarray) -> float:
    return POSITIVITY_FLOOR * max(float(np.max(np.abs(values))), np.finfo(float).tiny)


def matrix_function(A, kind: str, s: complex | None = None, scale: complex = 1.0,
                    eig: HermitianEigen | None = None) -> np.ndarray:
    """Apply a scalar function to a Hermitian matrix through its spectrum.

    ``kind`` is one of

    * ``"power"``: ``lambda ** s``.  Real ``s >= 0`` is allowed on positive
      semidefinite input (eigenvalues below the positivity floor are treated
      as zero); negative or complex ``s`` needs a positive definite matrix.
    * ``"exp"``: ``exp(scale * lambda)``; ``scale`` may be complex, so
      ``matrix_function(H, "exp", scale=1j * t)`` is the unitary group.
    * ``"log"``: natural logarithm, positive definite input only.

    A precomputed ``eig`` can be passed to skip the decomposition.
    """
    E = eig if eig is not None else eig_hermitian(A)
    lam = E.values
    floor = _positivity_floor(lam)
    if kind == "exp":
        return E.apply(lambda x: np.exp(scale * x))
    if kind == "log":
        if lam[0] <= floor:
            raise NotPositiveDefinite(f"smallest eigenvalue {lam[0]:.3e} below floor {floor:.3e}")
        return E.apply(np.log)
    if kind == "power":
        if s is None:
            raise ValueError("power needs an exponent s")
        s = complex(s)
        if s.imag == 0 and s.real >= 0:
            if lam[0] < -floor:
                raise NotPositiveDefinite(f"negative eigenvalue {lam[0]:.3e}")
            if s.real == 0:
                return np.eye(lam.size, dtype=np.complex128)
            clipped = np.where(lam > floor, lam, 0.0)
            return E.apply(lambda x: np.power(clipped, s.real))
        if lam[0] <= floor:
            raise NotPositiveDefinite(f"smallest eigenvalue {lam[0]:.3e} below floor {floor:.3e}")
        return E.apply(lambda x: np.exp(s * np.log(x)))
    raise ValueError(f"unknown matrix function {kind!r}")


@dataclass(frozen=True)
class PolarParts:
    """``A = isometry @ modulus`` with ``modulus = |A| >= 0``."""

    isometry: np.ndarray
    modulus: np.ndarray


def polar(A) -> PolarParts:
    """Polar decomposition through the SVD.

    The isometry is the partial isometry ``W V*`` restricted to the range of
    ``|A|`` (singular values below ``1e-14 ||A||`` count as zero), so
    ``U* U`` is the range projection rather than the identity when ``A`` is
    singular.
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("polar expects a square matrix")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    try:
        W, sig, Vh = np.linalg.svd(A)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise ConvergenceFailure(str(exc)) from exc
    keep = sig > 1e-14 * (sig[0] if sig.size else 0.0)
    V = dagger(Vh)
    modulus = (V * sig) @ Vh
    U = W[:, keep] @ Vh[keep, :]
    if np.isrealobj(A):
        return PolarParts(isometry=U.real, modulus=modulus.real)
    return PolarParts(isometry=U, modulus=modulus)


def random_matrix(rng: np.random.Generator, dim: int, scale: float | None = None) -> np.ndarray:
    """Complex Ginibre matrix normalised so that typical entries are O(1/sqrt(dim))."""
    s = 1.0 / np.sqrt(2 * dim) if scale is None else scale
    return s * (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    G = random_matrix(rng, dim)
    return 0.5 * (G + dagger(G))


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    Z = random_matrix(rng, dim, scale=1.0)
    Qm, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Qm * (d / np.abs(d))


def random_density(rng: np.random.Generator, dim: int, spread: float = 2.0) -> np.ndarray:
    """Faithful density matrix with log-eigenvalues spread over ``[-spread, 0]``."""
    logs = -spread * rng.random(dim)
    p = np.exp(logs)
    p /= p.sum()
    U = random_unitary(rng, dim)
    return (U * p) @ dagger(U)

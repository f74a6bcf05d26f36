"""Exponentiable elements: the series ``sum_{n>=1} lambda^n ||A^n||_p / n!``.

Two models are covered.

* Matrices with a scaled trace, where every series converges.
* Non-negative step functions on a measure space, given by levels
  ``(v_m, mu_m)``: the function equals ``v_m`` on a set of measure ``mu_m``.
  These model unbounded positive operators affiliated with a commutative
  algebra, and membership can genuinely fail.

Step functions are kept in canonical form (strictly increasing values).  Their
decreasing rearrangement lives on ``[0, total measure)`` with level ``m``
occupying ``[T_{m+1}, T_m)``, where ``T_m = sum_{m' >= m} mu_{m'}``.

Verdicts are sound: ``converges`` carries a rigorous tail bound, ``diverges``
carries a geometric comparison witness, anything else is ``inconclusive``.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import (BudgetExhausted, HypothesisViolated, RefinementOverflow,
                     TailNotCertified)
from .linalg import as_matrix
from .reports import BoundReport, digest
from .schatten import conjugate_index, growth_envelope_ok, singular_values
from .series import SeriesBudget, exp_tail_bound

LEVEL_CAP = 100_000
REL_TAIL = 1e-12
CHUNK = 512
DIVERGENCE_THRESHOLD = 1e6
LOG_TWO_E = math.log(2.0 * math.e)


# ---------------------------------------------------------------------------
# closed-form families

@dataclass(frozen=True)
class _Family:
    name: str
    log_measure: Callable[[np.ndarray], np.ndarray]
    log_tail_measure: Callable[[int], float]
    mu_ratio: Callable[[np.ndarray], np.ndarray]  # mu_{m+1}/mu_m, non-increasing in m
    mu_ratio_limit: float
    description: str


def _ex1_log_mu(m):
    m = np.asarray(m, dtype=float)
    return math.log(2.0) + np.log(m) - _lgamma(m + 2.0)


def _ex2_log_mu(m):
    m = np.asarray(m, dtype=float)
    return math.log(2.0) + math.log1p(-1.0 / (2.0 * math.e)) - m * LOG_TWO_E


def _lgamma(x):
    from scipy.special import gammaln
    return gammaln(x)


FAMILIES = {
    "example1": _Family(
        "example1",
        _ex1_log_mu,
        lambda m: math.log(2.0) - math.lgamma(m + 1.0),
        lambda m: (np.asarray(m, float) + 1.0) / (np.asarray(m, float) * (np.asarray(m, float) + 2.0)),
        0.0,
        "v_m = scale * m**power on a set of measure 2m/(m+1)!  (tail measure 2/m!)",
    ),
    "example2": _Family(
        "example2",
        _ex2_log_mu,
        lambda m: math.log(2.0) - m * LOG_TWO_E,
        lambda m: np.full(np.shape(m), 1.0 / (2.0 * math.e)),
        1.0 / (2.0 * math.e),
        "v_m = scale * m**power on a set of measure 2((2e)^-m - (2e)^-(m+1))  (tail measure 2(2e)^-m)",
    ),
}


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StepFunction:
    """Non-negative step function with level values ``v_m`` and measures ``mu_m``.

    ``generator_kind`` is ``"closed_form"`` (infinitely many levels,
    ``v_m = scale * m**power`` and measures from the named family) or
    ``"finite_list"`` (``levels`` holds ``(v, mu)`` pairs).
    """

    generator_kind: str
    name: str = ""
    scale: float = 1.0
    power: float = 1.0
    levels: tuple = ()

    def __post_init__(self):
        if self.generator_kind == "closed_form":
            if self.name not in FAMILIES:
                raise ValueError(f"unknown closed-form family {self.name!r}")
            if not (self.scale > 0 and self.power > 0):
                raise ValueError("scale and power must be positive")
        elif self.generator_kind == "finite_list":
            object.__setattr__(self, "levels", _canonical(self.levels))
        else:
            raise ValueError(f"unknown generator_kind {self.generator_kind!r}")

    # -- construction helpers ---------------------------------------------
    @classmethod
    def finite(cls, levels: Sequence[Sequence[float]]) -> "StepFunction":
        return cls("finite_list", levels=tuple(tuple(map(float, lv)) for lv in levels))

    @property
    def family(self) -> _Family:
        return FAMILIES[self.name]

    @property
    def is_finite(self) -> bool:
        return self.generator_kind == "finite_list"

    @property
    def n_levels(self) -> int | None:
        return len(self.levels) if self.is_finite else None

    def scaled(self, c: float) -> "StepFunction":
        """The function ``c f``."""
        if c <= 0:
            raise ValueError("scale factor must be positive")
        if self.is_finite:
            return StepFunction.finite([(c * v, mu) for v, mu in self.levels])
        return replace(self, scale=self.scale * c)

    def powered(self, a: float) -> "StepFunction":
        """The function ``f**a``."""
        if self.is_finite:
            return StepFunction.finite([(v ** a, mu) for v, mu in self.levels])
        return replace(self, scale=self.scale ** a, power=self.power * a)

    # -- level data ---------------------------------------------------------
    def level_arrays(self, start: int, stop: int) -> tuple[np.ndarray, np.ndarray]:
        """Values and log-measures of levels ``start <= m < stop`` (1-based)."""
        if self.is_finite:
            lv = self.levels[start - 1: stop - 1]
            v = np.array([x for x, _ in lv], dtype=float)
            lm = np.log(np.array([mu for _, mu in lv], dtype=float))
            return v, lm
        m = np.arange(start, stop, dtype=float)
        return self.scale * m ** self.power, self.family.log_measure(m)

    def value(self, m: int) -> float:
        return float(self.level_arrays(m, m + 1)[0][0])

    def measure(self, m: int) -> float:
        return float(np.exp(self.level_arrays(m, m + 1)[1][0]))

    def tail_measure(self, m: int) -> float:
        """``sum_{m' >= m} mu_{m'}``."""
        if self.is_finite:
            return float(sum(mu for _, mu in self.levels[m - 1:]))
        return math.exp(self.family.log_tail_measure(m))

    @property
    def total_measure(self) -> float:
        return self.tail_measure(1)

    @property
    def ratio_certificate(self) -> dict:
        """Structural facts behind the geometric tail bounds."""
        if self.is_finite:
            return {"kind": "finite", "levels": len(self.levels)}
        fam = self.family
        return {
            "kind": "monotone_ratio",
            "mu_ratio": "non-increasing",
            "mu_ratio_at_1": float(fam.mu_ratio(np.array([1.0]))[0]),
            "mu_ratio_limit": fam.mu_ratio_limit,
            "value_increments": "non-increasing" if self.power <= 1 else "increasing",
        }

    def ratio_bounds(self, weight: tuple, m0: int) -> tuple[float, float]:
        """``(sup, inf)`` over ``m >= m0`` of ``mu_{m+1} w(v_{m+1}) / (mu_m w(v_m))``.

        ``weight`` is ``("power", s)`` for ``v**s``, or ``("exp", lam, p)`` for
        ``exp((lam v)**p)``.  The supremum is ``inf`` when the weight ratio is
        not monotone (no certificate available).
        """
        if self.is_finite:
            raise ValueError("ratio bounds are only defined for closed-form families")
        fam = self.family
        mu_sup = float(fam.mu_ratio(np.array([float(m0)]))[0])
        mu_inf = fam.mu_ratio_limit
        a, c = self.power, self.scale
        if weight[0] == "power":
            s = weight[1]
            w_sup = math.exp(min(a * s * math.log1p(1.0 / m0), 700.0))
            w_inf = 1.0
        elif weight[0] == "exp":
            lam, p = weight[1], weight[2]
            b = a * p
            k = (lam * c) ** p
            if b > 1:
                return math.inf, _safe_mul(mu_inf, math.inf)
            w_sup = math.exp(min(k * ((m0 + 1.0) ** b - m0 ** b), 700.0))
            w_inf = math.exp(min(k, 700.0)) if b == 1 else 1.0
        else:
            raise ValueError(f"unknown weight {weight!r}")
        return mu_sup * w_sup, _safe_mul(mu_inf, w_inf)

    def first_level_above(self, lam: float) -> int:
        """Smallest ``m`` with ``v_m > lam`` (``n_levels + 1`` if none)."""
        if self.is_finite:
            for i, (v, _) in enumerate(self.levels, start=1):
                if v > lam:
                    return i
            return len(self.levels) + 1
        if lam < 0:
            return 1
        m = max(1, int(math.floor((lam / self.scale) ** (1.0 / self.power))))
        while m > 1 and self.value(m - 1) > lam:
            m -= 1
        while self.value(m) <= lam:
            m += 1
        return m

    # -- serialisation -------------------------------------------------------
    def to_dict(self) -> dict:
        if self.is_finite:
            return {"kind": "finite_list", "levels": [list(lv) for lv in self.levels]}
        return {"kind": "closed_form", "name": self.name,
                "params": {"scale": self.scale, "power": self.power}}

    def describe(self) -> str:
        if self.is_finite:
            return f"finite_list with {len(self.levels)} levels"
        return f"{self.name}(scale={self.scale!r}, power={self.power!r}): {self.family.description}"


def _safe_mul(a: float, b: float) -> float:
    if a == 0:
        return 0.0
    return a * b


def _canonical(levels) -> tuple:
    merged: dict[float, float] = {}
    for v, mu in levels:
        v, mu = float(v), float(mu)
        if v < 0 or not math.isfinite(v):
            raise ValueError(f"level value must be finite and non-negative, got {v}")
        if not mu > 0 or not math.isfinite(mu):
            raise ValueError(f"level measure must be positive and finite, got {mu}")
        merged[v] = merged.get(v, 0.0) + mu
    return tuple((v, merged[v]) for v in sorted(merged))


def example1(scale: float = 1.0, power: float = 1.0) -> StepFunction:
    return StepFunction("closed_form", "example1", scale, power)


def example2(scale: float = 1.0, power: float = 1.0) -> StepFunction:
    return StepFunction("closed_form", "example2", scale, power)


def step_function_from_dict(doc: dict) -> StepFunction:
    """Parse ``{"kind": "closed_form", "name": ..., "params": {...}}`` or
    ``{"kind": "finite_list", "levels": [[v, mu], ...]}``."""
    kind = doc.get("kind")
    if kind == "closed_form":
        params = dict(doc.get("params", {}))
        unknown = set(params) - {"scale", "power"}
        if unknown:
            raise ValueError(f"unknown params {sorted(unknown)}")
        return StepFunction("closed_form", doc["name"], float(params.get("scale", 1.0)),
                            float(params.get("power", 1.0)))
    if kind == "finite_list":
        return StepFunction.finite(doc["levels"])
    raise ValueError(f"unknown step-function kind {kind!r}")


def load_step_function(source) -> StepFunction:
    """Load from a JSON string, a path, or an already-parsed dict."""
    if isinstance(source, dict):
        return step_function_from_dict(source)
    text = str(source)
    if not text.lstrip().startswith("{"):
        with open(text) as fh:
            text = fh.read()
    return step_function_from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# certificates

@dataclass
class ExponentiabilityCertificate:
    verdict: str
    value: float | None = None
    orders_used: int = 0
    tail_bound: float = math.inf
    divergence_witness: dict | None = None
    levels_used: int = 0
    p: float = 1.0
    lam: float = 1.0
    notes: dict = field(default_factory=dict)

    @property
    def converges(self) -> bool:
        return self.verdict == "converges"

    @property
    def diverges(self) -> bool:
        return self.verdict == "diverges"

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("tail_bound", "lam", "value"):
            if isinstance(d[k], float) and math.isinf(d[k]):
                d[k] = "inf"
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _inconclusive(p, lam, reason, **kw) -> ExponentiabilityCertificate:
    return ExponentiabilityCertificate("inconclusive", p=p, lam=lam, notes={"reason": reason}, **kw)


# ---------------------------------------------------------------------------
# tails

def _log_tail_exp_weight(f: StepFunction, M: int, lam: float, p: float) -> float:
    """log of a bound on ``sum_{m > M} mu_m (exp((lam v_m)^p) - 1)``."""
    if f.is_finite:
        v, lm = f.level_arrays(M + 1, len(f.levels) + 1)
        if v.size == 0:
            return -math.inf
        terms = lm + _log_expm1((lam * v) ** p)
        return float(logsumexp(terms))
    sup, _ = f.ratio_bounds(("exp", lam, p), M + 1)
    if sup >= 1:
        return math.inf
    v, lm = f.level_arrays(M + 1, M + 2)
    return float(lm[0] + (lam * v[0]) ** p - math.log1p(-sup))


def _log_expm1(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        small = np.log(np.expm1(np.minimum(x, 50.0)))
    return np.where(x > 50.0, x + np.log1p(-np.exp(-np.minimum(x, 745.0))), small)


def _choose_head(f: StepFunction, lam: float, p: float, target_log: float) -> tuple[int, float]:
    """Smallest head size ``M`` whose level-tail bound is below ``exp(target_log)``."""
    if f.is_finite:
        return len(f.levels), -math.inf
    M = 1
    while M <= LEVEL_CAP:
        lt = _log_tail_exp_weight(f, M, lam, p)
        if lt <= target_log:
            return M, lt
        M += 1 if M < 64 else max(1, M // 8)
    raise BudgetExhausted(f"level tail not certified within {LEVEL_CAP} levels")


def _power_ratio_sups(f: StepFunction, s: float, m: np.ndarray) -> np.ndarray:
    """Vectorised ``sup_{m' >= m}`` of the term ratio for the weight ``v**s``."""
    log_w = f.power * s * np.log1p(1.0 / m)
    with np.errstate(over="ignore"):
        return f.family.mu_ratio(m) * np.exp(np.minimum(log_w, 700.0))


def _log_power_sum(f: StepFunction, s: float, rel: float = REL_TAIL,
                   first: int = 1) -> tuple[float, int, float]:
    """``log sum_{m >= first} v_m^s mu_m`` with a certified relative geometric tail.

    Returns ``(log_sum, levels_used, relative_tail_bound)``.
    """
    if f.is_finite:
        v, lm = f.level_arrays(first, len(f.levels) + 1)
        if v.size == 0:
            return -math.inf, len(f.levels), 0.0
        with np.errstate(divide="ignore"):
            terms = lm + s * np.log(v)
        return float(logsumexp(terms)), len(f.levels), 0.0
    acc = -math.inf
    start = first
    log_rel = math.log(rel)
    while start <= LEVEL_CAP:
        stop = start + CHUNK
        v, lm = f.level_arrays(start, stop + 1)
        terms = lm + s * np.log(v)
        prefix = np.logaddexp(acc, np.logaddexp.accumulate(terms[:-1]))
        m = np.arange(start + 1, stop + 1, dtype=float)  # first discarded level
        sups = _power_ratio_sups(f, s, m)
        with np.errstate(divide="ignore", invalid="ignore"):
            log_tail = np.where(sups < 1, terms[1:] - np.log1p(-np.minimum(sups, 1 - 1e-16)), np.inf)
        ok = np.nonzero(log_tail - prefix <= log_rel)[0]
        if ok.size:
            k = int(ok[0])
            return float(prefix[k]), start + k, math.exp(log_tail[k] - prefix[k])
        acc = float(prefix[-1])
        start = stop
    raise TailNotCertified(f"power sum with s={s} not certified within {LEVEL_CAP} levels")


def lp_norm_step(f: StepFunction, p: float) -> float:
    """``(sum_m v_m^p mu_m)^{1/p}`` with relative tail below ``1e-12``.

    Raises
    ------
    TailNotCertified
        if no geometric ratio certificate applies within the level cap.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    log_sum, _, _ = _log_power_sum(f, p)
    return math.exp(log_sum / p)


# ---------------------------------------------------------------------------
# the series

def _finite_head_series(v: np.ndarray, lm: np.ndarray, lam: float, p: float,
                        budget: SeriesBudget, allocated: float,
                        uncapped: bool = False) -> tuple[float, int, float]:
    """Series of a finite list of levels: ``(value, orders_used, n_tail_bound)``."""
    keep = v > 0
    v, lm = v[keep], lm[keep]
    if v.size == 0 or lam == 0:
        return 0.0, 0, 0.0
    if p == 1:
        return float(np.sum(np.exp(lm) * np.expm1(lam * v))), 0, 0.0
    log_mass = float(logsumexp(lm))
    vmax = float(np.max(v))
    x = lam * vmax
    prefactor = math.exp(log_mass / p)
    N = 1
    cap = 100_000 if uncapped else budget.max_order
    while True:
        tail = prefactor * exp_tail_bound(x, N)
        if tail <= allocated:
            break
        if budget.remainder_policy == "fixed_order" and not uncapped and N >= budget.max_order:
            break
        N += 1
        if N > cap:
            raise BudgetExhausted(f"order budget {budget.max_order} too small for lam*v_max = {x:.4g}")
    logv = np.log(v)
    n = np.arange(1, N + 1, dtype=float)
    log_S = logsumexp(lm[None, :] + p * n[:, None] * logv[None, :], axis=1)
    log_terms = n * math.log(lam) - _lgamma(n + 1.0) + log_S / p
    return float(np.sum(np.exp(log_terms))), N, tail


def exponentiable_series(f: StepFunction, p: float = 1.0, lam: float = 1.0,
                         budget: SeriesBudget = SeriesBudget(),
                         threshold: float = DIVERGENCE_THRESHOLD) -> ExponentiabilityCertificate:
    """Certificate for ``sum_{n>=1} lam^n/n! (sum_m v_m^{np} mu_m)^{1/p}``.

    For ``p = 1`` the double sum is exchanged into ``sum_m mu_m (e^{lam v_m} - 1)``.
    For ``p > 1`` the first ``M`` levels are summed order by order and the
    remaining levels are bounded through Hölder's inequality by
    ``(e - 1)^{1/q} (sum_{m>M} mu_m (exp((lam v_m)^p) - 1))^{1/p}``.
    ``lam = inf`` asks for membership at every finite ``lam``; the value is
    then ``None``.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    if math.isinf(lam):
        return _infinite_lambda(f, p)
    tol = budget.tolerance

    if not f.is_finite:
        div = _divergence_certificate(f, p, lam, threshold)
        if div is not None:
            return div

    try:
        if f.is_finite:
            M, log_lt = len(f.levels), -math.inf
        else:
            # a rough head value to turn the relative target into an absolute one
            M0, _ = _choose_head(f, lam, p, p * (math.log(tol) - 3.0))
            M, log_lt = M0, _log_tail_exp_weight(f, M0, lam, p)
        v, lm = f.level_arrays(1, M + 1)
        q = conjugate_index(p)
        lt = 0.0 if log_lt == -math.inf else (math.e - 1) ** (1 / q if math.isfinite(q) else 0.0) \
            * math.exp(log_lt / p)
        value, N, n_tail = _finite_head_series(v, lm, lam, p, budget, allocated=max(tol / 2, tol - lt))
    except BudgetExhausted as exc:
        return _inconclusive(p, lam, str(exc))
    tail = lt + n_tail
    verdict = "converges" if tail <= tol * max(1.0, value) else "inconclusive"
    return ExponentiabilityCertificate(verdict, value, N, tail, None, M, p, lam,
                                       {"level_tail": lt, "order_tail": n_tail})


def _divergence_certificate(f: StepFunction, p: float, lam: float,
                            threshold: float) -> ExponentiabilityCertificate | None:
    if p == 1:
        _, inf_ratio = f.ratio_bounds(("exp", lam, 1.0), 1)
        if inf_ratio < 1:
            return None
        m0 = 1
        term = f.measure(m0) * math.expm1(lam * f.value(m0))
        n_star, log_partial = _ordered_partial_sum(f, p, lam, threshold)
        witness = {"level": m0, "ratio_lower_bound": inf_ratio, "level_term": term,
                   "order": n_star, "log_partial_sum": log_partial,
                   "partial_sum": _exp_or_inf(log_partial), "threshold": threshold}
        return ExponentiabilityCertificate("diverges", None, n_star, math.inf, witness, 0, p, lam)
    _, inf_ratio = f.ratio_bounds(("power", p), 1)
    if inf_ratio >= 1:
        witness = {"order": 1, "inner_ratio_lower_bound": inf_ratio, "threshold": threshold}
        return ExponentiabilityCertificate("diverges", None, 1, math.inf, witness, 0, p, lam)
    return None


def _exp_or_inf(x: float) -> float:
    return math.exp(x) if x < 700 else math.inf


def _ordered_partial_sum(f: StepFunction, p: float, lam: float, threshold: float,
                         max_order: int = 20_000) -> tuple[int, float]:
    """First order ``n*`` with ``sum_{n <= n*} lam^n/n! S_n^{1/p} > threshold`` (log-space)."""
    acc = -math.inf
    target = math.log(threshold)
    for n in range(1, max_order + 1):
        log_S, _, _ = _log_power_sum(f, n * p, rel=1e-6)
        acc = float(np.logaddexp(acc, n * math.log(lam) - math.lgamma(n + 1.0) + log_S / p))
        if acc > target:
            return n, acc
    raise BudgetExhausted("partial sums did not cross the divergence threshold")


def _infinite_lambda(f: StepFunction, p: float) -> ExponentiabilityCertificate:
    lam = math.inf
    if f.is_finite:
        return ExponentiabilityCertificate("converges", None, 0, 0.0, None, len(f.levels), p, lam,
                                           {"reason": "bounded function"})
    fam = f.family
    if fam.mu_ratio_limit == 0 and f.power * p <= 1:
        return ExponentiabilityCertificate("converges", None, 0, 0.0, None, 0, p, lam,
                                           {"reason": "super-geometric measure decay with sublinear exponent"})
    if p == 1 and f.power == 1 and fam.mu_ratio_limit > 0:
        # smallest lambda whose comparison ratio is at least 11/10
        lam_star = (math.log(1.1) - math.log(fam.mu_ratio_limit)) / f.scale
        cert = exponentiable_series(f, 1.0, lam_star)
        if cert.diverges:
            cert.lam = lam
            cert.divergence_witness["lambda"] = lam_star
            return cert
    return _inconclusive(p, lam, "no certificate for every finite lambda")


def exponentiable_matrix(A, tau_scale: float = 1.0, p: float = 1.0, lam: float = 1.0,
                         budget: SeriesBudget = SeriesBudget(), growth_order: int = 64) -> ExponentiabilityCertificate:
    """Series for a matrix with trace ``tau_scale * tr``.

    Always converges; the truncation order is extended as far as needed.
    ``notes["growth"]`` holds ``(|tau(|A|^n)^{1/n} - ||A|||, allowed envelope)``.
    """
    A = as_matrix(A)
    s = singular_values(A)
    dev, allowed = growth_envelope_ok(A, growth_order)
    notes = {"growth": (dev, allowed), "operator_norm": float(s[0]) if s.size else 0.0}
    if math.isinf(lam):
        return ExponentiabilityCertificate("converges", None, 0, 0.0, None, s.size, p, lam, notes)
    lm = np.full(s.size, math.log(tau_scale))
    value, N, tail = _finite_head_series(s, lm, lam, p, budget, budget.tolerance, uncapped=True)
    return ExponentiabilityCertificate("converges", value, N, tail, None, s.size, p, lam, notes)


# ---------------------------------------------------------------------------
# derived properties

def scaling_law_check(f: StepFunction, lam: float, p: float = 1.0,
                      budget: SeriesBudget = SeriesBudget()) -> BoundReport:
    """Compare the series of ``f`` at ``lam`` with the series of ``lam f`` at 1.

    ``lhs`` is the discrepancy (value difference, or ``|log ratio|`` of the
    divergence witnesses); ``inf`` if the verdicts differ.
    """
    a = exponentiable_series(f, p, lam, budget)
    b = exponentiable_series(f.scaled(lam), p, 1.0, budget)
    tol = budget.tolerance
    if a.verdict != b.verdict:
        lhs, rhs = math.inf, tol
    elif a.converges:
        lhs = abs(a.value - b.value)
        rhs = max(tol * max(1.0, abs(a.value)), a.tail_bound + b.tail_bound)
    elif a.diverges:
        wa, wb = a.divergence_witness, b.divergence_witness
        lhs = abs(wa.get("ratio_lower_bound", 0) - wb.get("ratio_lower_bound", 0)) \
            + float(wa.get("order") != wb.get("order"))
        rhs = tol
    else:
        lhs, rhs = 0.0, tol
    return BoundReport("scaling_law", lhs, rhs, digest(f.to_dict(), lam, p),
                       indices=(p, lam))


def measurability_profile(f: StepFunction, thresholds: Sequence[float]) -> list[tuple[float, float]]:
    """``[(lam, measure of {f > lam}), ...]``."""
    out = []
    for lam in thresholds:
        m = f.first_level_above(float(lam))
        if f.is_finite and m > len(f.levels):
            out.append((float(lam), 0.0))
        else:
            out.append((float(lam), f.tail_measure(m)))
    return out


def density_approximation(f: StepFunction, p: float, cut: float) -> tuple[StepFunction, float]:
    """Bounded part ``g = f 1_{f <= cut}`` and ``||f - g||_p`` (summed directly
    over the discarded levels, certified tail).

    Raises
    ------
    RefinementOverflow
        if the bounded part would need more than ``LEVEL_CAP`` levels.
    """
    m = f.first_level_above(cut)
    if m > LEVEL_CAP:
        raise RefinementOverflow(f"cut {cut!r} keeps {m - 1} levels")
    v, lm = f.level_arrays(1, m)
    g_levels = list(zip(v.tolist(), np.exp(lm).tolist())) or [(0.0, f.total_measure)]
    if f.is_finite and m > len(f.levels):
        return StepFunction.finite(g_levels), 0.0
    log_sum, _, _ = _log_power_sum(f, p, first=m)
    return StepFunction.finite(g_levels), math.exp(log_sum / p)


# ---------------------------------------------------------------------------
# convex combinations on the common refinement

def _cells_above(f: StepFunction, x0: float) -> list[tuple[float, float, float]]:
    """Cells ``(lo, hi, value)`` of the decreasing rearrangement meeting ``[x0, inf)``,
    clipped to that half-line."""
    cells = []
    m = 1
    last = f.n_levels
    while last is None or m <= last:
        hi = f.tail_measure(m)
        if hi <= x0:
            break
        lo = 0.0 if (last is not None and m == last) else f.tail_measure(m + 1)
        cells.append((max(lo, x0), hi, f.value(m)))
        m += 1
        if m > LEVEL_CAP:
            raise RefinementOverflow(f"more than {LEVEL_CAP} cells above {x0!r}")
    return cells


def _first_level_below(f: StepFunction, x0: float) -> int:
    """Smallest level whose cell meets ``[0, x0)``."""
    m = 1
    while f.tail_measure(m + 1) >= x0:
        m += 1
        if m > LEVEL_CAP:
            raise RefinementOverflow("cut point beyond the level cap")
    return m


def combine_rearranged(f: StepFunction, g: StepFunction, op: Callable[[float, float], float],
                       x0: float = 0.0) -> StepFunction:
    """Finite step function ``op(f*, g*)`` on ``[x0, max total)`` over the merged grid.

    Raises
    ------
    RefinementOverflow
        if the merged grid exceeds the level cap.
    """
    cf = _cells_above(f, x0)
    cg = _cells_above(g, x0)
    if len(cf) + len(cg) > LEVEL_CAP:
        raise RefinementOverflow(f"common refinement needs {len(cf) + len(cg)} cells")
    grid = sorted({x for lo, hi, _ in cf + cg for x in (lo, hi)} | {x0})

    def lookup(cells, x):
        for lo, hi, v in cells:
            if lo <= x < hi:
                return v
        return 0.0

    levels = []
    for lo, hi in zip(grid[:-1], grid[1:]):
        if hi > lo:
            mid = 0.5 * (lo + hi)
            levels.append((op(lookup(cf, mid), lookup(cg, mid)), hi - lo))
    return StepFunction.finite(levels)


def _level_tail_bound(f: StepFunction, first_level: int, p: float, lam: float = 1.0) -> float:
    """Hölder bound on the series contribution of levels ``>= first_level``."""
    q = conjugate_index(p)
    log_lt = _log_tail_exp_weight(f, first_level - 1, lam, p)
    if log_lt == -math.inf:
        return 0.0
    return (math.e - 1) ** (0.0 if math.isinf(q) else 1 / q) * math.exp(log_lt / p)


def convexity_probe(f: StepFunction, g: StepFunction, theta: float, p: float = 1.0,
                    budget: SeriesBudget = SeriesBudget()) -> ExponentiabilityCertificate:
    """Certificate for ``theta f* + (1 - theta) g*`` at ``lam = 1``.

    Above the cut point ``x0`` the combination is summed on the merged grid;
    below it the pointwise bound ``h^n <= theta f^n + (1 - theta) g^n`` turns
    the tails of ``f`` and ``g`` into a tail bound for ``h``.
    ``notes["convex_bound"]`` holds ``theta val(f) + (1 - theta) val(g)``.
    """
    if not 0 <= theta <= 1:
        raise ValueError("theta must lie in [0, 1]")
    cf = exponentiable_series(f, p, 1.0, budget)
    cg = exponentiable_series(g, p, 1.0, budget)
    if not (cf.converges and cg.converges):
        raise HypothesisViolated("both inputs must be certified exponentiable at lambda = 1")
    bound = theta * cf.value + (1 - theta) * cg.value
    if theta == 0 or theta == 1:
        out = replace(cg if theta == 0 else cf)
        out.notes = dict(out.notes, convex_bound=bound)
        return out
    x0 = 0.0
    cuts = []
    for h, c in ((f, cf), (g, cg)):
        if not h.is_finite:
            cuts.append(h.tail_measure(c.levels_used + 1))
    if cuts:
        x0 = min(cuts)
    head = combine_rearranged(f, g, lambda a, b: theta * a + (1 - theta) * b, x0)
    top = 0.0
    if x0 > 0:
        top = theta * _level_tail_bound(f, _first_level_below(f, x0), p) \
            + (1 - theta) * _level_tail_bound(g, _first_level_below(g, x0), p)
    try:
        hc = exponentiable_series(head, p, 1.0, budget)
    except BudgetExhausted as exc:  # pragma: no cover - finite lists do not exhaust at p = 1
        return _inconclusive(p, 1.0, str(exc))
    tail = hc.tail_bound + top
    verdict = "converges" if hc.converges and tail <= budget.tolerance * max(1.0, hc.value) else "inconclusive"
    return ExponentiabilityCertificate(verdict, hc.value, hc.orders_used, tail, None,
                                       len(head.levels), p, 1.0,
                                       {"convex_bound": bound, "cut": x0, "top_tail": top})


def product_rearranged(f: StepFunction, g: StepFunction) -> StepFunction:
    """Pointwise product of the decreasing rearrangements of two finite lists."""
    if not (f.is_finite and g.is_finite):
        raise ValueError("products are formed on finite truncations")
    return combine_rearranged(f, g, lambda a, b: a * b)


def truncate(f: StepFunction, levels: int) -> StepFunction:
    """First ``levels`` levels of ``f`` as a finite list."""
    v, lm = f.level_arrays(1, levels + 1)
    return StepFunction.finite(list(zip(v.tolist(), np.exp(lm).tolist())))


BUILTIN_EXAMPLES = {
    "example1": example1(),
    "example2": example2(),
}

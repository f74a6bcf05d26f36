"""Structured check results and their CSV serialisation."""
from __future__ import annotations

import csv
import hashlib
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

REPORT_COLUMNS = ("name", "dim", "indices", "lhs", "rhs", "slack", "seed")
TRACE_COLUMNS = ("order", "term_norm", "partial_norm", "certified_tail")


def digest(*arrays) -> str:
    """Short reproducibility hash of the given inputs (arrays or scalars)."""
    h = hashlib.sha256()
    for a in arrays:
        if isinstance(a, np.ndarray):
            h.update(np.ascontiguousarray(a).tobytes())
            h.update(str(a.shape).encode())
        else:
            h.update(repr(a).encode())
    return h.hexdigest()[:16]


def fmt_float(x) -> str:
    """Deterministic text form of a float (shortest round-trip repr)."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def fmt_index(p) -> str:
    if p is None:
        return ""
    if isinstance(p, (tuple, list)):
        return ";".join(fmt_index(q) for q in p)
    if isinstance(p, str):
        return p
    p = float(p)
    if math.isinf(p):
        return "inf"
    return repr(p)


@dataclass
class BoundReport:
    """One checked inequality ``lhs <= rhs``; ``slack = rhs - lhs``.

    Negative slack signals a violation; whether it is *significant* is
    decided by the caller's tolerance (see :meth:`passed`).
    """

    name: str
    lhs: float
    rhs: float
    inputs_digest: str = ""
    dim: int = 0
    indices: object = None
    seed: int | None = None
    slack: float = field(init=False)

    def __post_init__(self):
        self.lhs = float(self.lhs)
        self.rhs = float(self.rhs)
        self.slack = self.rhs - self.lhs

    def passed(self, tol: float = 1e-10) -> bool:
        if math.isnan(self.slack):
            return False
        return self.slack >= -tol * max(1.0, abs(self.rhs)) if math.isfinite(self.rhs) else True

    def row(self) -> list[str]:
        return [
            self.name,
            str(self.dim),
            fmt_index(self.indices),
            fmt_float(self.lhs),
            fmt_float(self.rhs),
            fmt_float(self.slack),
            "" if self.seed is None else str(self.seed),
        ]


def write_report_csv(reports: Iterable[BoundReport], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for r in reports:
        w.writerow(r.row())


def reports_to_csv(reports: Iterable[BoundReport]) -> str:
    buf = io.StringIO()
    write_report_csv(reports, buf)
    return buf.getvalue()


def min_slack(reports: Sequence[BoundReport]) -> float:
    return min(r.slack for r in reports)


@dataclass
class ConvergenceTrace:
    """Per-order record of a truncated series.

    ``term_norms[n]`` is the norm of the order-``n`` term, ``partial_norms[n]``
    the norm of the partial sum through order ``n`` and ``certified_tails[n]``
    an upper bound on the norm of everything after order ``n``.
    """

    term_norms: list = field(default_factory=list)
    partial_norms: list = field(default_factory=list)
    certified_tails: list = field(default_factory=list)

    def append(self, term_norm: float, partial_norm: float, tail: float) -> None:
        self.term_norms.append(float(term_norm))
        self.partial_norms.append(float(partial_norm))
        self.certified_tails.append(float(tail))

    def __len__(self):
        return len(self.term_norms)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for n, (a, b, c) in enumerate(zip(self.term_norms, self.partial_norms, self.certified_tails)):
            w.writerow([n, fmt_float(a), fmt_float(b), fmt_float(c)])
        return buf.getvalue()

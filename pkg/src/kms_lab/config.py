"""Experiment configuration: JSON loading, validation and normalisation."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import IoFailure, ParseError, ValidationError
from .series import POLICIES, SeriesBudget

SUITES = ("inequalities", "modular", "kms", "expansional", "exponentiable", "perturbation", "all")
FIELDS = ("suite", "dims", "trials", "seed", "tolerance_overrides", "budget", "output_path")
DEFAULT_TOLERANCE = 1e-10
SEED_MAX = 2 ** 64 - 1


@dataclass
class ExperimentConfig:
    suite: str = "all"
    dims: list = field(default_factory=lambda: [2, 3, 4])
    trials: int = 10
    seed: int = 0
    tolerance_overrides: dict = field(default_factory=dict)
    budget: SeriesBudget = field(default_factory=SeriesBudget)
    output_path: str = "kms_lab_out"

    def __post_init__(self):
        validate(self)

    def tolerance(self, name: str) -> float:
        o = self.tolerance_overrides
        return float(o.get(name, o.get("default", DEFAULT_TOLERANCE)))

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "dims": list(self.dims),
            "trials": self.trials,
            "seed": self.seed,
            "tolerance_overrides": dict(sorted(self.tolerance_overrides.items())),
            "budget": self.budget.to_dict(),
            "output_path": self.output_path,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def replace(self, **changes) -> "ExperimentConfig":
        d = self.to_dict()
        d.update({k: v for k, v in changes.items() if v is not None})
        return config_from_dict(d)


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def validate(cfg: ExperimentConfig) -> None:
    if cfg.suite not in SUITES:
        raise ValidationError(f"suite: {cfg.suite!r} is not one of {', '.join(SUITES)}")
    if not isinstance(cfg.dims, (list, tuple)) or not cfg.dims:
        raise ValidationError("dims: expected a non-empty list of integers")
    for i, d in enumerate(cfg.dims):
        if not _is_int(d) or d < 2:
            raise ValidationError(f"dims[{i}]: {d!r} must be an integer >= 2")
    if not _is_int(cfg.trials) or cfg.trials < 1:
        raise ValidationError(f"trials: {cfg.trials!r} must be an integer >= 1")
    if not _is_int(cfg.seed) or not 0 <= cfg.seed <= SEED_MAX:
        raise ValidationError(f"seed: {cfg.seed!r} must be an integer in [0, 2^64)")
    if not isinstance(cfg.tolerance_overrides, dict):
        raise ValidationError("tolerance_overrides: expected an object")
    for k, v in cfg.tolerance_overrides.items():
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not (v > 0 and math.isfinite(v)):
            raise ValidationError(f"tolerance_overrides.{k}: {v!r} must be a positive number")
    if not isinstance(cfg.output_path, str) or not cfg.output_path:
        raise ValidationError("output_path: expected a non-empty string")


def _budget_from(doc) -> SeriesBudget:
    if not isinstance(doc, dict):
        raise ValidationError("budget: expected an object")
    unknown = set(doc) - {"max_order", "tolerance", "remainder_policy"}
    if unknown:
        raise ValidationError(f"budget: unknown field(s) {sorted(unknown)}")
    max_order = doc.get("max_order", 25)
    tol = doc.get("tolerance", DEFAULT_TOLERANCE)
    policy = doc.get("remainder_policy", "certified_tail")
    if not _is_int(max_order) or max_order < 1:
        raise ValidationError(f"budget.max_order: {max_order!r} must be an integer >= 1")
    if isinstance(tol, bool) or not isinstance(tol, (int, float)) or not tol > 0:
        raise ValidationError(f"budget.tolerance: {tol!r} must be a positive number")
    if policy not in POLICIES:
        raise ValidationError(f"budget.remainder_policy: {policy!r} is not one of {POLICIES}")
    return SeriesBudget(max_order, float(tol), policy)


def config_from_dict(doc) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ValidationError("top level: expected a JSON object")
    unknown = set(doc) - set(FIELDS)
    if unknown:
        raise ValidationError(f"unknown field(s) {sorted(unknown)}")
    kwargs = {k: doc[k] for k in FIELDS if k in doc and k != "budget"}
    if "dims" in kwargs and isinstance(kwargs["dims"], list):
        kwargs["dims"] = list(kwargs["dims"])
    if "tolerance_overrides" in kwargs and isinstance(kwargs["tolerance_overrides"], dict):
        kwargs["tolerance_overrides"] = {
            k: (float(v) if isinstance(v, int) and not isinstance(v, bool) else v)
            for k, v in kwargs["tolerance_overrides"].items()}
    budget = _budget_from(doc.get("budget", {}))
    return ExperimentConfig(budget=budget, **kwargs)


def parse_config(text: str, source: str = "<string>") -> ExperimentConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return config_from_dict(doc)


def load_config(path: str) -> ExperimentConfig:
    """Read, parse and validate a JSON experiment configuration.

    Raises
    ------
    IoFailure
        if the file cannot be read.
    ParseError
        on malformed JSON, with line and column.
    ValidationError
        on invalid or unknown fields.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read config {path!r}: {exc}") from exc
    return parse_config(text, path)


def normalize(doc: dict) -> dict:
    """Fill defaults so that ``config_from_dict(doc).to_dict() == normalize(doc)``."""
    return config_from_dict(doc).to_dict()

"""``kms-lab`` command-line entry point."""
from __future__ import annotations

import argparse
import sys

from .config import SUITES, ExperimentConfig, load_config
from .errors import ConfigInvalid, IoFailure
from .exponentiable import BUILTIN_EXAMPLES
from .suites import run_suite


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kms-lab", description="Seeded numerical verification suites.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a verification suite")
    run.add_argument("--config", required=True, help="JSON experiment configuration")
    run.add_argument("--suite", choices=SUITES, help="override the configured suite")
    run.add_argument("--seed", type=int, help="override the configured seed")
    run.add_argument("--out", help="output directory (overrides output_path)")
    sub.add_parser("examples", help="print the built-in step-function examples")
    return parser


def _run(args) -> int:
    cfg: ExperimentConfig = load_config(args.config)
    cfg = cfg.replace(suite=args.suite, seed=args.seed, output_path=args.out)
    report = run_suite(cfg)
    s = report.summary
    print(f"suite={cfg.suite} rows={s['rows']} passed={s['passed']} failed={s['failed']} "
          f"inconclusive={s['inconclusive']} informational={s['informational']} "
          f"wall_time={report.wall_time:.2f}s out={cfg.output_path}")
    return 1 if report.failed > 0 else 0


def _examples() -> int:
    for name, f in BUILTIN_EXAMPLES.items():
        print(f"{name}: {f.describe()}")
        v, mu = f.value(1), f.measure(1)
        print(f"  level 1: value={v!r} measure={mu!r}; total measure={f.total_measure!r}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "examples":
            return _examples()
        return _run(args)
    except ConfigInvalid as exc:
        print(f"kms-lab: invalid configuration: {exc}", file=sys.stderr)
        return 2
    except IoFailure as exc:
        print(f"kms-lab: I/O failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

"""Command line entry point: ``permcast run | exact | estimate``."""

from __future__ import annotations

import argparse
import json
import math
import sys

from permcast.estimator import averaged_estimate
from permcast.exact_perm import SizeGuardError, perm_naive, perm_rect, perm_ryser
from permcast.flat_case import BudgetError
from permcast.harness import ConfigError, ScenarioConfig, load_config, run_scenario
from permcast.matrix_core import MatrixFormatError, ShapeError, read_matrix

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2

_METHODS = {"naive": perm_naive, "ryser": perm_ryser, "rect": perm_rect}


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"{text} is not an unsigned 64-bit integer")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="permcast", description="Random-determinant permanent estimation.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a named scenario")
    run.add_argument("--config", help="JSON file with scenario fields")
    run.add_argument("--scenario")
    run.add_argument("--seed", type=_u64)
    run.add_argument("--trials", type=int)
    run.add_argument("--out", dest="output", help="output prefix")
    run.add_argument("--concurrency", type=_positive_int)
    run.add_argument("--field", choices=["real", "complex"])
    run.add_argument("--shape", type=int, nargs=2, metavar=("N", "M"))
    run.add_argument("--bounds", type=float, nargs=2, metavar=("A", "B"))
    run.add_argument("--matrix", dest="matrix_file")
    for name in ("epsilon", "s", "delta", "alpha", "rho"):
        run.add_argument(f"--{name}", type=float)
    run.add_argument("--draws-per-estimate", dest="draws_per_estimate", type=_positive_int)
    run.add_argument("--budget", type=_positive_int)

    exact = sub.add_parser("exact", help="exact permanent of a matrix file")
    exact.add_argument("--matrix", required=True)
    exact.add_argument("--method", choices=sorted(_METHODS), default="rect")

    est = sub.add_parser("estimate", help="Monte Carlo permanent estimate")
    est.add_argument("--matrix", required=True)
    est.add_argument("--trials", type=int, required=True)
    est.add_argument("--seed", type=_u64, required=True)
    est.add_argument("--field", choices=["real", "complex"], default="real")
    return parser


_OVERRIDES = (
    "scenario", "seed", "trials", "output", "concurrency", "field", "shape", "bounds",
    "matrix_file", "epsilon", "s", "delta", "alpha", "rho", "draws_per_estimate", "budget",
)


def _cmd_run(args) -> int:
    data = load_config(args.config) if args.config else {}
    for key in _OVERRIDES:
        value = getattr(args, key)
        if value is not None:
            data[key] = list(value) if isinstance(value, list) else value
    cfg = ScenarioConfig.from_dict(data)
    result = run_scenario(cfg)
    summary = {
        "scenario": cfg.scenario,
        "statistics": sorted(result.records),
        "duration_seconds": round(result.duration, 3),
    }
    if cfg.output:
        summary["output"] = [cfg.output + ".summary.json", cfg.output + ".trials.csv"]
    print(json.dumps(summary))
    return EXIT_OK


def _finite_or_none(x: float):
    return x if math.isfinite(x) else None


def _cmd_exact(args) -> int:
    A = read_matrix(args.matrix)
    pv = _METHODS[args.method](A)
    print(json.dumps({
        "method": args.method,
        "shape": list(A.shape),
        "log_value": _finite_or_none(pv.log_value),
        "value": pv.value,
    }))
    return EXIT_OK


def _cmd_estimate(args) -> int:
    A = read_matrix(args.matrix)
    mean, se = averaged_estimate(A, args.trials, args.field, args.seed)
    print(json.dumps({"shape": list(A.shape), "field": args.field, "trials": args.trials,
                      "seed": args.seed, "mean": mean, "se": se}))
    return EXIT_OK


_COMMANDS = {"run": _cmd_run, "exact": _cmd_exact, "estimate": _cmd_estimate}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 for usage errors; those are validation errors here
        return EXIT_OK if exc.code == 0 else EXIT_VALIDATION
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, MatrixFormatError, ShapeError, SizeGuardError, BudgetError, ValueError) as exc:
        print(f"permcast: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"permcast: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

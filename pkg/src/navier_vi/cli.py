"""Command line entry point: ``run``, ``describe`` and ``solve``."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .experiment import ConfigError, ExperimentConfig, describe, execute, load_config, write_outputs
from .io import ProblemFileError, solve_file
from .vi import ConvergenceError

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="navier-vi", description="Discrete checks for the spectral fractional obstacle problem.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_text in (("run", "run theorem suites and write reports"),
                            ("describe", "print the resolved plan without running")):
        q = sub.add_parser(name, help=help_text)
        q.add_argument("--config", help="JSON config file; flags override its entries")
        q.add_argument("--suite", choices=["operators", "vi", "regularity", "comparison",
                                           "extension", "all"])
        q.add_argument("--sizes", type=_int_list, help="comma-separated node counts")
        q.add_argument("--s", type=_float_list, help="comma-separated fractional orders")
        q.add_argument("--seed", type=int)
        q.add_argument("--tol", type=float, help="relative tolerance for margins")
        q.add_argument("--floor", type=float, help="strictness floor for strict claims")
        q.add_argument("--out", help="output directory")
        q.add_argument("--jobs", type=int, help="worker processes")
    q = sub.add_parser("solve", help="solve one obstacle problem from a JSON file")
    q.add_argument("problem")
    q.add_argument("--out", help="write the solution JSON here (default: stdout)")
    return p


def resolve_config(args) -> ExperimentConfig:
    data = load_config(args.config) if args.config else {}
    for key in ("suite", "sizes", "s", "seed", "tol", "floor", "out", "jobs"):
        val = getattr(args, key)
        if val is not None:
            data[key] = val
    return ExperimentConfig.from_mapping(data).validate()


def _run(args) -> int:
    config = resolve_config(args)
    reports, dumps = execute(config)
    try:
        out = write_outputs(config, reports, dumps, command=" ".join(sys.argv[1:]))
    except OSError as exc:
        print(f"error: cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_USAGE
    failed = [r for r in reports if not r.passed]
    weak = [r for r in reports if r.status == "weak-pass"]
    print(f"{len(reports)} reports, {len(failed)} failed, {len(weak)} weak-pass -> {out}")
    for r in failed:
        print(f"FAIL {r.theorem} {json.dumps(r.instance, sort_keys=True)} worst={r.worst:.3e}")
    return EXIT_FAIL if failed else EXIT_OK


def _solve(args) -> int:
    sol = solve_file(args.problem, args.out)
    if args.out is None:
        json.dump(sol.to_dict(), sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "describe":
            sys.stdout.write(describe(resolve_config(args)))
            return EXIT_OK
        if args.command == "run":
            return _run(args)
        return _solve(args)
    except (ConfigError, ProblemFileError, OSError, ValueError, ConvergenceError,
            np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

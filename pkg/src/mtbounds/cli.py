"""Command-line interface.

Subcommands: matrix (export a bound matrix), constants (emit a constant
family, raw/rescaled/modified), optimize (solve the improvement program),
verify (feasibility check), adjust (apply a procedure to a p-value file),
simulate (power study). Exit codes: 0 success, 2 usage or input error,
3 numeric/solver failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import fileio, lp
from .constants import (
    bh_constants,
    by_constants,
    gr_sd_constants,
    lr_fdp_constants,
    lr_kfwer_constants,
    rescale,
)
from .matrices import ErrorRateSpec, Rate, associated_matrix, bound_vector
from .procedures import ProcedureSpec, run_procedure
from .simulation import SimConfig, run_study

USAGE_ERROR = 2
NUMERIC_ERROR = 3


class CommandError(Exception):
    """User-facing failure with a dedicated exit code."""

    def __init__(self, message: str, code: int = USAGE_ERROR):
        super().__init__(message)
        self.code = code


def _rate_spec(args) -> ErrorRateSpec:
    if args.rate is None:
        raise CommandError("--rate is required for this command")
    rate = Rate(args.rate)
    try:
        if rate.is_fdp:
            if args.gamma is None:
                raise CommandError(f"--gamma is required for rate {rate.value}")
            return ErrorRateSpec(rate, args.n, gamma=args.gamma)
        if args.k is None:
            raise CommandError(f"--k is required for rate {rate.value}")
        return ErrorRateSpec(rate, args.n, k=args.k)
    except ValueError as exc:
        raise CommandError(str(exc)) from exc


def _family_constants(args, spec: ErrorRateSpec | None):
    family = args.family
    if family == "bh":
        return bh_constants(args.n)
    if family == "by":
        return by_constants(args.n)
    if family == "gr":
        return gr_sd_constants(args.n)
    if family == "rs":
        if spec is not None and not spec.rate.is_fdp:
            return lr_kfwer_constants(args.n, spec.k)
        if args.gamma is None:
            raise CommandError("--gamma is required for family rs")
        return lr_fdp_constants(args.n, args.gamma)
    raise CommandError(f"unknown family {family!r}")


def cmd_matrix(args) -> int:
    spec = _rate_spec(args)
    matrix = associated_matrix(spec)
    text = fileio.matrix_json(matrix) if args.format == "json" else fileio.matrix_csv(matrix)
    fileio.write_text(text, args.output)
    return 0


def cmd_constants(args) -> int:
    spec = _rate_spec(args) if args.rate else None
    if spec is not None and args.family in ("by", "gr"):
        raise CommandError(f"family {args.family!r} is pre-normalized and takes no --rate")
    c = _family_constants(args, spec)
    if spec is not None and args.family in ("bh", "rs"):
        matrix = associated_matrix(spec)
        c, _ = rescale(c, matrix)
        if args.modified:
            problem = lp.build_problem(matrix, c)
            solution = _solve(problem, args.cache_dir)
            c = solution.xi
    elif args.modified:
        raise CommandError("--modified requires --rate with family bh or rs")
    if args.alpha is not None:
        c = c.scaled(args.alpha)
    text = fileio.constants_json(c) if args.format == "json" else fileio.constants_csv(c)
    fileio.write_text(text, args.output)
    return 0


def _solve(problem: lp.LPProblem, cache_dir) -> lp.LPSolution:
    solution = (lp.solve_cached(problem, cache_dir) if cache_dir
                else lp.solve(problem))
    if solution.status is not lp.SolveStatus.OPTIMAL:
        raise CommandError(f"solver failed: {solution.status.value}", NUMERIC_ERROR)
    return solution


def cmd_optimize(args) -> int:
    spec = _rate_spec(args)
    if args.family in ("by", "gr"):
        raise CommandError(f"family {args.family!r} is pre-normalized; nothing to optimize")
    matrix = associated_matrix(spec)
    floor, _ = rescale(_family_constants(args, spec), matrix)
    weights = fileio.read_weights(args.weights, args.n) if args.weights else None
    try:
        problem = lp.build_problem(matrix, floor, weights=weights)
    except lp.InfeasibleFloorError as exc:
        raise CommandError(str(exc), NUMERIC_ERROR) from exc
    solution = _solve(problem, args.cache_dir)
    text = (fileio.solution_json(problem, solution) if args.format == "json"
            else fileio.solution_csv(problem, solution))
    fileio.write_text(text, args.output)
    return 0


def cmd_verify(args) -> int:
    spec = _rate_spec(args)
    matrix = associated_matrix(spec)
    if args.input:
        c = fileio.read_constants(args.input)
        if c.n != args.n:
            raise CommandError(f"constants file has {c.n} entries, expected {args.n}")
    else:
        if args.family is None:
            raise CommandError("verify needs --input or --family")
        c = _family_constants(args, spec)
        if args.family in ("bh", "rs"):
            c, _ = rescale(c, matrix)
            if args.modified:
                solution = _solve(lp.build_problem(matrix, c), args.cache_dir)
                c = solution.xi
    worst = float(np.max(bound_vector(matrix, c)))
    feasible = worst <= 1.0 + 1e-9
    fileio.write_text(f"max bound {worst:.6f}\nfeasible: {'yes' if feasible else 'no'}\n",
                      args.output)
    return 0


def _procedure_spec(args) -> ProcedureSpec:
    try:
        if args.family in ("by", "gr"):
            if args.rate is not None:
                raise CommandError(f"family {args.family!r} does not take --rate")
            return ProcedureSpec(family=args.family, n=args.n, alpha=args.alpha)
        spec = _rate_spec(args)
        return ProcedureSpec(family=args.family, n=args.n, alpha=args.alpha,
                             rate=spec, modified=args.modified)
    except ValueError as exc:
        raise CommandError(str(exc)) from exc


def cmd_adjust(args) -> int:
    p = fileio.read_pvalues(args.input)
    if args.n is None:
        args.n = p.n
    spec = _procedure_spec(args)
    if spec.n != p.n:
        raise CommandError(f"procedure is for n={spec.n}, input has {p.n} p-values")
    decision, adjusted = run_procedure(p, spec, cache_dir=args.cache_dir)
    header = f"{spec.name} alpha={spec.alpha!r} n={spec.n}"
    text = (fileio.decisions_json(p, decision, adjusted, header) if args.format == "json"
            else fileio.decisions_csv(p, decision, adjusted, header))
    fileio.write_text(text, args.output)
    return 0


def cmd_simulate(args) -> int:
    config = SimConfig(
        n=args.n,
        true_counts=tuple(args.true_counts) if args.true_counts else (),
        effects=tuple(args.d),
        rho=args.rho,
        reps=args.reps,
        alpha=args.alpha if args.alpha is not None else 0.5,
        gamma=args.gamma if args.gamma is not None else 0.05,
        fdr_level=args.fdr_level,
        seed=args.seed,
    )
    report = run_study(config, threads=args.threads, cache_dir=args.cache_dir,
                       trace=args.trace)
    text = fileio.report_json(report) if args.format == "json" else fileio.report_csv(report)
    fileio.write_text(text, args.output)
    return 0


def _int_list(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part.strip() != ""]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mtbounds",
        description="Critical-constant bounds and procedures for multiple testing "
                    "under arbitrary p-value dependence.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, *, rate: bool = False, family: bool = False,
               alpha: bool = False, cache: bool = False) -> None:
        p.add_argument("--n", type=int, help="number of hypotheses")
        if rate:
            p.add_argument("--rate", choices=[r.value for r in Rate],
                           help="error rate and stepping direction")
            p.add_argument("--k", type=int, help="k for kFWER rates")
            p.add_argument("--gamma", type=float, help="gamma for FDP rates")
        if family:
            p.add_argument("--family", choices=["bh", "rs", "by", "gr"],
                           help="constant family")
        if alpha:
            p.add_argument("--alpha", type=float, help="significance level multiplier")
        if cache:
            p.add_argument("--cache-dir", help="directory for cached solver output")
        p.add_argument("--output", help="output file (default: stdout)")
        p.add_argument("--format", choices=["csv", "json"], default="csv")

    p = sub.add_parser("matrix", help="export a bound matrix")
    common(p, rate=True)
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("constants", help="emit a constant family (raw, rescaled or modified)")
    common(p, rate=True, family=True, alpha=True, cache=True)
    p.add_argument("--modified", action="store_true", help="apply the LP improvement")
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("optimize", help="solve the constant-improvement program")
    common(p, rate=True, family=True, cache=True)
    p.add_argument("--weights", help="file with one row weight per line")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("verify", help="check feasibility of constants against a matrix")
    common(p, rate=True, family=True, cache=True)
    p.add_argument("--modified", action="store_true")
    p.add_argument("--input", help="constants file to verify (csv or json)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("adjust", help="apply a procedure to a p-value file")
    common(p, rate=True, family=True, alpha=True, cache=True)
    p.add_argument("--modified", action="store_true")
    p.add_argument("--input", required=True, help="p-value file (one per line, or label,value)")
    p.set_defaults(func=cmd_adjust)

    p = sub.add_parser("simulate", help="run the Monte Carlo power study")
    common(p, alpha=True, cache=True)
    p.add_argument("--gamma", type=float, help="FDP exceedance threshold (default 0.05)")
    p.add_argument("--d", type=float, action="append",
                   help="effect size; repeat for a grid (default 0.1 1 3)")
    p.add_argument("--true-counts", type=_int_list,
                   help="comma-separated grid of true-null counts")
    p.add_argument("--rho", type=float, default=0.5, help="equicorrelation (default 0.5)")
    p.add_argument("--reps", type=int, default=20000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fdr-level", type=float, default=0.05)
    p.add_argument("--threads", type=int, help="worker threads (default: all cores)")
    p.add_argument("--trace", help="append per-replication rejection counts to this file")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "simulate" and not args.d:
        args.d = [0.1, 1.0, 3.0]
    if args.n is None and args.command != "adjust":
        parser.error(f"{args.command} requires --n")
    try:
        return args.func(args)
    except CommandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except fileio.InputFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


def entry_point() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry_point()

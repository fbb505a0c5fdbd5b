"""Command-line entry point: ``parsimplex {gen,solve,bench,cachelimit}``."""
from __future__ import annotations

import argparse
import itertools
import logging
import sys
from typing import Optional, Sequence

from . import bench
from .generator import GenSpec, generate, realized_density
from .lp_model import (
    AntiCycling,
    ProblemFormatError,
    SolverConfig,
    Status,
    ValidationError,
    dump_problem,
    load_problem,
    write_problem,
)
from .parallel import solve_parallel
from .tableau import solve_serial

EXIT_OPTIMAL = 0
EXIT_ERROR = 1
# 2 is argparse's usage-error code
EXIT_UNBOUNDED = 3
EXIT_ITERATION_LIMIT = 4
EXIT_PARSE_ERROR = 5

_STATUS_EXIT = {
    Status.OPTIMAL: EXIT_OPTIMAL,
    Status.UNBOUNDED: EXIT_UNBOUNDED,
    Status.ITERATION_LIMIT: EXIT_ITERATION_LIMIT,
}


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _cmd_gen(args) -> int:
    problem = generate(GenSpec(args.m, args.n, args.density, args.seed))
    if args.out in (None, "-"):
        write_problem(problem, sys.stdout)
    else:
        dump_problem(problem, args.out)
        print(f"wrote {args.m}x{args.n} instance (realized density "
              f"{realized_density(problem):.4f}) to {args.out}", file=sys.stderr)
    return EXIT_OPTIMAL


def _cmd_solve(args) -> int:
    try:
        problem = load_problem(args.file)
    except ProblemFormatError as exc:
        print(f"{args.file}: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE_ERROR
    except OSError as exc:
        print(f"{args.file}: {exc.strerror}", file=sys.stderr)
        return EXIT_ERROR

    anti = AntiCycling.bland_after_stall(args.bland_after) if args.bland_after else AntiCycling.off()
    config = SolverConfig(threads=args.threads, chunk_min=args.chunk_min,
                          max_iterations=args.max_iterations, anti_cycling=anti)
    try:
        if args.serial:
            outcome = solve_serial(problem, config)
        else:
            outcome = solve_parallel(problem, config)
    except ValidationError as exc:
        print(f"{args.file}: invalid problem: {exc}", file=sys.stderr)
        return EXIT_PARSE_ERROR

    if outcome.optimal:
        print(f"{outcome.status} z={outcome.objective:.12g}")
    else:
        print(f"{outcome.status}")
    print(f"iterations={outcome.iterations}")
    print(f"elapsed={outcome.solve_seconds:.6f}s")
    if args.print_x and outcome.x is not None:
        print("x=" + " ".join(f"{v:.12g}" for v in outcome.x))
    return _STATUS_EXIT[outcome.status]


def _cmd_bench(args) -> int:
    config = bench.GridConfig(
        sizes=list(itertools.product(args.m, args.n)),
        thread_counts=sorted(args.threads),
        runs=args.runs,
        density=args.density,
        seed=args.seed,
        serial_convention=bench.SerialConvention(args.serial_convention),
        instances=args.instances,
        warmup=args.warmup,
        chunk_min=args.chunk_min,
    )
    try:
        config.validate()
    except bench.GridConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    report = bench.run_grid(config)
    report.check_identities()
    for row in [bench.CSV_COLUMNS] + [cell.csv_row() for cell in report.cells]:
        print(",".join(str(v) for v in row))
    if args.out:
        try:
            paths = bench.emit_report(report, args.out)
        except OSError as exc:
            print(str(exc), file=sys.stderr)
            return EXIT_ERROR
        for p in paths:
            print(f"wrote {p}", file=sys.stderr)
    return EXIT_OPTIMAL


def _cmd_cachelimit(args) -> int:
    model = bench.CacheModel(cache_bytes=args.cache_mib * bench.MIB, element_bytes=args.element_bytes)
    print("b,max_constraints")
    for b in args.b:
        print(f"{b},{bench.cache_limit_constraints(b, model)}")
    for b in args.b:
        note = bench.cache_limit_note(b, model)
        if note:
            print(note, file=sys.stderr)
    if args.m is not None and args.n is not None:
        size = bench.tableau_bytes(args.m, args.n, args.element_bytes)
        print(f"exact tableau bytes for {args.m}x{args.n}: {size} "
              f"({'over' if size > model.cache_bytes else 'within'} {model.cache_bytes} cache bytes)")
        print(f"model bound exceeded: {bench.over_cache_limit(args.m, args.n, model)}")
    return EXIT_OPTIMAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="parsimplex", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a random solvable instance")
    p.add_argument("--m", type=_positive, required=True, help="number of constraints")
    p.add_argument("--n", type=_positive, required=True, help="number of variables")
    p.add_argument("--density", type=float, default=0.9)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("solve", help="solve a problem file")
    p.add_argument("file")
    p.add_argument("--threads", type=_positive, default=1)
    p.add_argument("--chunk-min", type=_positive, default=64)
    p.add_argument("--max-iterations", type=int, default=None)
    p.add_argument("--bland-after", type=_positive, default=None, metavar="STALL",
                   help="switch to Bland's rule after STALL degenerate pivots")
    p.add_argument("--serial", action="store_true", help="use the serial reference solver")
    p.add_argument("--print-x", action="store_true", help="print the primal solution")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("bench", help="time a size x thread-count grid")
    p.add_argument("--m", type=_positive, nargs="+", required=True)
    p.add_argument("--n", type=_positive, nargs="+", required=True)
    p.add_argument("--threads", type=_positive, nargs="+", default=[1, 2, 4])
    p.add_argument("--runs", type=_positive, default=10)
    p.add_argument("--instances", type=_positive, default=1)
    p.add_argument("--warmup", type=int, default=1)
    p.add_argument("--density", type=float, default=0.9)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--chunk-min", type=_positive, default=64)
    p.add_argument("--serial-convention", choices=[c.value for c in bench.SerialConvention],
                   default=bench.SerialConvention.TWICE_T2.value)
    p.add_argument("--out", help="directory for report.csv and plot data")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("cachelimit", help="maximum constraints that fit the cache model")
    p.add_argument("--b", type=int, nargs="+", default=[256, 512, 1024, 2048, 4096, 8192],
                   help="variable counts")
    p.add_argument("--cache-mib", type=_positive, default=64)
    p.add_argument("--element-bytes", type=_positive, default=8)
    p.add_argument("--m", type=_positive, help="report exact tableau bytes for this m")
    p.add_argument("--n", type=_positive, help="... and this n")
    p.set_defaults(func=_cmd_cachelimit)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: ``cardenc <command> ...``."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import bench
from .cnf import CnfError, Formula, read_dimacs, stats, write_dimacs
from .encoders import METHODS, VARIANTS, EncoderConfig, UnknownEncoding, build_constraint
from .geometry import ORDERINGS, SEQUENCES, TestCaseSpec, build_instance
from .seqcounter import seqcounter_clause_count
from .solve import CapExceeded, SolveError, SolverCommand, Status, enumerate_models, run_external, solve
from .sortnet import encode_sortnet
from .totalizer import tree_atmost_size, tree_variable_bound

EXIT_SAT, EXIT_UNSAT = 10, 20


def _read_formula(path: str):
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    return read_dimacs(text)


def _emit(text: str, output: str | None) -> None:
    if output and output != "-":
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _add_encoding_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=METHODS, default="seq")
    p.add_argument("--variant", default="",
                   help="; ".join(f"{m}: {', '.join(v)}" for m, v in VARIANTS.items()))
    p.add_argument("-o", "--output", help="write DIMACS here instead of stdout")


def cmd_encode(args) -> int:
    config = EncoderConfig(args.method, args.variant)
    formula = build_constraint(args.n, args.r, config)
    formula.set_meta("encoding", config.label)
    formula.set_meta("bound", f"{'==' if config.equality else '<='}{args.r}")
    _emit(write_dimacs(formula), args.output)
    return 0


def cmd_testcase(args) -> int:
    spec = TestCaseSpec(args.sequence, args.L, args.polarity.upper(), args.ordering, args.seed)
    formula = build_instance(spec, EncoderConfig(args.method, args.variant))
    _emit(write_dimacs(formula), args.output)
    return 0


def cmd_enumerate(args) -> int:
    formula = _read_formula(args.file)
    try:
        result = enumerate_models(formula, args.projection, cap=args.cap, method=args.method, seed=args.seed)
    except CapExceeded as exc:
        print(f"more than {exc.cap} models (at least {exc.lower_bound})")
        return 1
    print(result.count)
    return 0


def _print_result(res, show_model: bool) -> int:
    if res.status is Status.TIMEOUT:
        print("s UNKNOWN")
        return 0
    print("s SATISFIABLE" if res.status is Status.SAT else "s UNSATISFIABLE")
    if res.decisions is not None:
        print(f"c decisions {res.decisions}")
    if res.conflicts is not None:
        print(f"c conflicts {res.conflicts}")
    print(f"c wall_time {res.wall_time:.6f}")
    if res.status is Status.SAT and show_model and res.model:
        lits = [v if res.model[v] else -v for v in range(1, len(res.model))]
        for start in range(0, len(lits), 20):
            print("v " + " ".join(map(str, lits[start:start + 20])))
        print("v 0")
    return EXIT_SAT if res.status is Status.SAT else EXIT_UNSAT


def cmd_solve(args) -> int:
    formula = _read_formula(args.file)
    external = args.external or os.environ.get(bench.SOLVER_ENV)
    if external:
        cmd = SolverCommand(external, timeout=args.timeout, seed_flag=args.seed_flag)
        res = run_external(cmd, formula, seed=args.seed)
    else:
        res = solve(formula, seed=args.seed, timeout=args.timeout)
    return _print_result(res, not args.no_model)


def cmd_bench(args) -> int:
    config = bench.load_config(args.config)
    if args.workers:
        config.workers = args.workers
    print(f"c {len(config.testcases) * len(config.encodings)} instances x {config.repeats} seeds, "
          f"solver {bench.describe_command(config)}", file=sys.stderr)
    records = bench.run_suite(config)
    summaries = bench.write_reports(config, records)
    if not config.summary_csv:
        sys.stdout.write(bench.summary_to_csv(summaries))
    return 0


def cmd_stats(args) -> int:
    st = stats(_read_formula(args.file))
    print("aux_vars clauses literals main_var_literals")
    print(*st.astuple())
    return 0


def _sort_clauses(n: int, r: int) -> int:
    f = Formula(n)
    encode_sortnet(f, f.mains, r)
    return len(f.clauses)


def cmd_sweep_counts(args) -> int:
    """Check the unstrengthened size claims over ``lo <= n <= hi``."""
    violations = 0
    checked = 0
    for n in range(max(2, args.n_min), args.n_max + 1):
        for r in range(1, n):
            aux, tree, _, _ = tree_atmost_size(n, r)
            seq = seqcounter_clause_count(n, r)
            checked += 1
            problems = []
            if tree > seq:
                problems.append(f"tree {tree} > seq {seq}")
            if aux > tree_variable_bound(n, r):
                problems.append(f"tree aux {aux} > r(n-2) = {tree_variable_bound(n, r)}")
            if args.sort:
                srt = _sort_clauses(n, r)
                if tree > srt:
                    problems.append(f"tree {tree} > sort {srt}")
            if problems:
                violations += 1
                if violations <= args.show:
                    print(f"n={n} r={r}: " + "; ".join(problems))
    print(f"{checked} (n, r) pairs checked, {violations} with violations")
    return 1 if violations else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cardenc", description="Cardinality-constraint CNF encodings.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="encode sum(x_1..x_n) <= r (or == r) as DIMACS")
    p.add_argument("n", type=int)
    p.add_argument("r", type=int)
    _add_encoding_args(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("testcase", help="generate a grid-covering instance")
    p.add_argument("sequence", choices=SEQUENCES)
    p.add_argument("L", type=int)
    p.add_argument("--polarity", default="SAT", choices=["SAT", "UNSAT", "sat", "unsat"])
    p.add_argument("--ordering", default="row", choices=ORDERINGS)
    p.add_argument("--seed", type=int, default=0, help="seed of the random ordering")
    _add_encoding_args(p)
    p.set_defaults(func=cmd_testcase)

    p = sub.add_parser("enumerate", help="count models of a DIMACS file")
    p.add_argument("file", help="DIMACS path or - for stdin")
    p.add_argument("--projection", choices=["mains", "all"], default="all")
    p.add_argument("--cap", type=int, default=2_000_000)
    p.add_argument("--method", choices=["dpll", "blocking"], default="dpll")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("solve", help="solve a DIMACS file; exit 10 for SAT, 20 for UNSAT")
    p.add_argument("file", help="DIMACS path or - for stdin")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--timeout", type=float)
    p.add_argument("--external", help=f"external solver command ({{file}} and {{seed}} are substituted); "
                                      f"defaults to ${bench.SOLVER_ENV} if set")
    p.add_argument("--seed-flag", help="appended to the external command, e.g. '--seed={seed}'")
    p.add_argument("--no-model", action="store_true", help="omit the v lines")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="run a benchmark matrix from a key=value config file")
    p.add_argument("config")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("stats", help="print aux vars, clauses, literals and main-variable literals")
    p.add_argument("file", help="DIMACS path or - for stdin")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("sweep-counts", help="check tree clause and variable counts over a range of n")
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=100)
    p.add_argument("--sort", action="store_true", help="also compare against the sort network (slow)")
    p.add_argument("--show", type=int, default=20, help="print at most this many violations")
    p.set_defaults(func=cmd_sweep_counts)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CnfError, SolveError, UnknownEncoding, ValueError, OSError) as exc:
        print(f"cardenc: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

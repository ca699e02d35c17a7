"""Command line front end: ``bbap {generate,solve,verify,oracle,export,bench}``."""
from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import bnp
from .io import (FormatError, dumps_instance, dumps_solution, export_compact_lp, instance_digest,
                 loads_solution, read_instance)
from .model import MalformedSolutionError, check_solution, validate_instance
from .oracle import OracleLimitError, oracle_solve
from .profits import DomainError, GenConfig, generate
from .report import FAMILIES, BenchRecord, plot_bench, plot_schedule, records_csv, summarize

EXIT_OK = 0
EXIT_FAILED = 1        # verification failed, or no feasible solution exists
EXIT_USAGE = 2         # bad flags (argparse)
EXIT_MALFORMED = 3     # unreadable or invalid input file
EXIT_LIMIT = 4         # instance exceeds oracle limits
EXIT_IO = 5            # output could not be written

log = logging.getLogger("bbap")


class CliError(Exception):
    def __init__(self, msg, code):
        super().__init__(msg)
        self.code = code


def _load(path):
    try:
        inst = read_instance(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_MALFORMED)
    except (FormatError, DomainError) as exc:
        raise CliError(f"{path}: {exc}", EXIT_MALFORMED)
    problems = validate_instance(inst)
    if problems:
        raise CliError(f"{path}: invalid instance:\n  " + "\n  ".join(problems), EXIT_MALFORMED)
    return inst


def _write(path, text):
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}", EXIT_IO)


def cmd_generate(args):
    try:
        cfg = GenConfig(n=args.flights, m=args.belts, t_max=args.tmax, treq_frac=args.treq_frac,
                        bag_range=tuple(args.bags), productivity_range=tuple(args.productivity),
                        alpha=args.alpha, beta1=args.beta1, beta2=args.beta2, seed=args.seed)
    except DomainError as exc:
        raise CliError(str(exc), EXIT_USAGE)
    inst = generate(cfg)
    problems = validate_instance(inst)
    if problems:
        log.warning("generated instance is not schedulable: %s", "; ".join(problems))
    text = dumps_instance(inst)
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _solution_line(res: bnp.BnpResult) -> str:
    obj = "none" if res.incumbent is None else str(res.objective)
    return (f"time {res.elapsed:.2f}\tgap(%) {res.gap_percent:.2f}\t"
            f"optimal {'yes' if res.proven_optimal else 'no'}\tnodes {res.nodes}\tobjective {obj}\t"
            f"ub {res.best_ub:.2f}")


def cmd_solve(args):
    inst = _load(args.instance)

    def progress(nodes, ub, inc, elapsed):
        if args.verbose and nodes % 50 == 0:
            log.info("nodes %d  ub %.2f  incumbent %s  %.1fs", nodes, ub, inc, elapsed)

    res = bnp.solve(inst, args.time_limit, on_node=progress)
    print(_solution_line(res))
    if res.incumbent is None:
        print("no feasible assignment found" + (" (instance infeasible)" if res.infeasible else ""))
        return EXIT_FAILED
    meta = dict(ub=res.best_ub, gap_percent=res.gap_percent, nodes=res.nodes,
                elapsed_seconds=round(res.elapsed, 2), proven_optimal=res.proven_optimal)
    if args.out:
        _write(args.out, dumps_solution(inst, res.incumbent, meta))
    if args.plot:
        plot_schedule(inst, res.incumbent, args.plot)
    return EXIT_OK


def cmd_verify(args):
    inst = _load(args.instance)
    try:
        sol, digest, _ = loads_solution(Path(args.solution).read_text())
    except OSError as exc:
        raise CliError(f"cannot read {args.solution}: {exc}", EXIT_MALFORMED)
    except FormatError as exc:
        raise CliError(f"{args.solution}: {exc}", EXIT_MALFORMED)
    ok = True
    if digest != instance_digest(inst):
        print("digest mismatch: solution was produced for a different instance")
        ok = False
    try:
        rep = check_solution(inst, sol)
    except MalformedSolutionError as exc:
        raise CliError(str(exc), EXIT_MALFORMED)
    for v in rep.violations:
        print(v)
    if not rep.objective_matches:
        print(f"objective mismatch: stored {sol.objective}, recomputed {rep.objective}")
    ok = ok and rep.feasible and rep.objective_matches
    print(f"{'feasible' if ok else 'INVALID'}\tobjective {rep.objective}")
    return EXIT_OK if ok else EXIT_FAILED


def cmd_oracle(args):
    inst = _load(args.instance)
    try:
        got = oracle_solve(inst)
    except OracleLimitError as exc:
        raise CliError(str(exc), EXIT_LIMIT)
    if got is None:
        print("infeasible")
        return EXIT_FAILED
    sol, obj = got
    print(f"objective {obj}")
    if args.out:
        _write(args.out, dumps_solution(inst, sol, dict(ub=obj, gap_percent=0.0, proven_optimal=True)))
    return EXIT_OK


def cmd_export(args):
    inst = _load(args.instance)
    try:
        with open(args.out, "w") as fh:
            export_compact_lp(inst, fh)
    except OSError as exc:
        raise CliError(f"cannot write {args.out}: {exc}", EXIT_IO)
    return EXIT_OK


def run_bench_instance(family: str, alpha: float, treq_frac: float, seed: int, time_limit: float) -> BenchRecord:
    cfg = GenConfig(**FAMILIES[family], treq_frac=treq_frac, alpha=alpha, seed=seed)
    inst = generate(cfg)
    res = bnp.solve(inst, time_limit)
    return BenchRecord(family, seed, alpha, treq_frac, res.objective, res.best_ub, round(res.elapsed, 2),
                       res.gap_percent, res.proven_optimal, res.nodes)


def cmd_bench(args):
    seeds = list(range(args.seed_base, args.seed_base + args.seeds))
    job = [(args.family, args.alpha, args.treq_frac, s, args.time_limit) for s in seeds]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as ex:
            records = list(ex.map(run_bench_instance, *zip(*job)))
    else:
        records = [run_bench_instance(*j) for j in job]
    table = records_csv(records)
    summary = summarize(records)
    fam = FAMILIES[args.family]
    sys.stdout.write(table)
    print(f"# t_req in [0, {args.treq_frac}*t_max]\tn {fam['n']}\tm {fam['m']}\talpha {args.alpha}\t{summary.row()}")
    if args.out_dir:
        out = Path(args.out_dir)
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise CliError(f"cannot create {out}: {exc}", EXIT_IO)
        _write(out / "records.tsv", table)
        plot_bench(records, out / "bench.png")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bbap", description="Branch-and-price for baggage belt assignment.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a random instance")
    g.add_argument("--flights", type=int, default=30)
    g.add_argument("--belts", type=int, default=5)
    g.add_argument("--tmax", type=int, default=120)
    g.add_argument("--alpha", type=float, default=0.5)
    g.add_argument("--beta1", type=float, default=500.0)
    g.add_argument("--beta2", type=float, default=500.0)
    g.add_argument("--treq-frac", type=float, default=0.5)
    g.add_argument("--bags", type=int, nargs=2, default=(50, 300), metavar=("LO", "HI"))
    g.add_argument("--productivity", type=int, nargs=2, default=(10, 20), metavar=("LO", "HI"))
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="branch-and-price an instance file")
    s.add_argument("instance")
    s.add_argument("--time-limit", type=float, default=300.0)
    s.add_argument("--out")
    s.add_argument("--plot", help="write a belt Gantt chart (PNG/PDF/SVG by extension)")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="check a solution file against its instance")
    v.add_argument("instance")
    v.add_argument("solution")
    v.set_defaults(func=cmd_verify)

    o = sub.add_parser("oracle", help="brute-force a tiny instance")
    o.add_argument("instance")
    o.add_argument("--out")
    o.set_defaults(func=cmd_oracle)

    e = sub.add_parser("export", help="write the compact model in LP format")
    e.add_argument("instance")
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_export)

    b = sub.add_parser("bench", help="solve a seeded instance family and print the summary row")
    b.add_argument("--family", choices=sorted(FAMILIES), default="n30m5")
    b.add_argument("--alpha", type=float, default=0.5)
    b.add_argument("--treq-frac", type=float, default=0.5)
    b.add_argument("--seeds", type=int, default=10)
    b.add_argument("--seed-base", type=int, default=1)
    b.add_argument("--time-limit", type=float, default=300.0)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--out-dir", help="write records.tsv and bench.png here")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"bbap: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())

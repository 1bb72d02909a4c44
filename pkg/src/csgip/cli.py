"""Command line entry point: ``csgip gen | solve | bench``."""
from __future__ import annotations

import argparse
import hashlib
import math
import sys
from pathlib import Path

from . import bench
from .baselines import BRUTE_FORCE_MAX_N, DP_MAX_N, ProblemTooLarge
from .combinatorics import MAX_AGENTS, format_cs
from .ip_search import OPTIMAL, POLICIES, TIME_LIMITED, SearchConfig, solve
from .value_model import DISTRIBUTIONS, InstanceFileError, dumps, from_csv, generate, loads, to_csv

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_TIME_LIMIT = 3


def _int_list(text: str) -> list[int]:
    """Parse ``"3"``, ``"10-14"`` or ``"1,4,9"`` (ranges inclusive)."""
    out = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if "-" in chunk:
            lo, hi = chunk.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(chunk))
    return out


def _names(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def read_instance(path: str):
    data = Path(path).read_bytes()
    if path.endswith(".csv"):
        return from_csv(data.decode())
    return loads(data)


def cmd_gen(args) -> int:
    if not 1 <= args.n <= MAX_AGENTS:
        print(f"error: --n must be in 1..{MAX_AGENTS}", file=sys.stderr)
        return EXIT_ERROR
    table = generate(args.n, args.dist, args.seed)
    data = to_csv(table).encode() if args.out.endswith(".csv") else dumps(table)
    Path(args.out).write_bytes(data)
    print(f"{args.out} sha256={hashlib.sha256(data).hexdigest()}")
    return EXIT_OK


def cmd_solve(args) -> int:
    try:
        table = read_instance(args.input)
    except (OSError, InstanceFileError) as exc:
        print(f"error: cannot read {args.input}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    oracle = None
    if args.oracle and table.n <= DP_MAX_N:
        oracle = bench.oracle_value(table)
    if args.algo == "ip":
        config = SearchConfig(beta_star=args.beta_star, policy=args.policy, part_count=args.part_count,
                              max_part=args.max_part, time_limit=args.time_limit)
        sol = solve(table, config)
        rows = bench.trace_rows(sol, oracle)
        trace_out = args.trace_out or str(Path(args.input).with_suffix(".trace.csv"))
        bench.write_trace(rows, trace_out)
        print(f"status={sol.status} value={sol.value!r} beta={sol.beta_final!r} "
              f"time_ms={sol.elapsed * 1000:.3f} cs_examined={sol.cs_examined}")
        print(f"cs={format_cs(sol.cs)}")
        print(f"trace={trace_out}")
        if oracle is not None and oracle > 0:
            print(f"r_opt={sol.value / oracle!r}")
        return EXIT_TIME_LIMIT if sol.status == TIME_LIMITED else EXIT_OK
    try:
        rec = bench.run_solver(table, args.algo, oracle=oracle)
    except ProblemTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(f"status={OPTIMAL} value={rec.final_value!r} time_ms={rec.time_ms:.3f}")
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        n_values = _int_list(args.n)
        seeds = _int_list(args.seeds)
    except ValueError:
        print("error: --n and --seeds take integers or ranges like 10-14", file=sys.stderr)
        return EXIT_ERROR
    if not seeds:
        print("error: seed list is empty", file=sys.stderr)
        return EXIT_ERROR
    dists = _names(args.dists)
    algos = _names(args.algos)
    bad = [d for d in dists if d not in DISTRIBUTIONS] + [a for a in algos if a not in bench.SOLVERS]
    if bad or any(not 1 <= n <= MAX_AGENTS for n in n_values):
        print(f"error: invalid sweep specification {bad or n_values}", file=sys.stderr)
        return EXIT_ERROR
    out = Path(args.out_dir)
    traces = out / "traces"
    traces.mkdir(parents=True, exist_ok=True)
    records = bench.run_sweep(n_values, dists, seeds, algos, trace_dir=traces)
    (out / "runs.csv").write_text(bench.runs_csv(records))
    (out / "summary.csv").write_text(bench.aggregate(records))
    failures = sum(1 for r in records if r.error)
    print(f"{len(records)} runs ({failures} failed) -> {out / 'runs.csv'}, {out / 'summary.csv'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="csgip", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a random instance file")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--dist", choices=DISTRIBUTIONS, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="*.csgv (binary) or *.csv")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="solve an instance file")
    s.add_argument("input")
    s.add_argument("--algo", choices=bench.SOLVERS, default="ip")
    s.add_argument("--beta-star", type=float, default=1.0)
    s.add_argument("--time-limit", type=float, default=None, help="seconds")
    s.add_argument("--policy", choices=POLICIES, default=POLICIES[0])
    s.add_argument("--part-count", type=int, default=None)
    s.add_argument("--max-part", type=int, default=None)
    s.add_argument("--trace-out", default=None)
    s.add_argument("--oracle", action="store_true", help=f"fill r_opt using DP (n <= {DP_MAX_N})")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="run a sweep and write runs/summary CSVs")
    b.add_argument("--n", required=True, help="e.g. 10-14")
    b.add_argument("--dists", default=",".join(DISTRIBUTIONS))
    b.add_argument("--seeds", required=True, help="e.g. 0-19")
    b.add_argument("--algos", default="ip,dp")
    b.add_argument("--out-dir", required=True)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "beta_star", 1.0) < 1 or math.isnan(getattr(args, "beta_star", 1.0)):
        print("error: --beta-star must be >= 1", file=sys.stderr)
        return EXIT_ERROR
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

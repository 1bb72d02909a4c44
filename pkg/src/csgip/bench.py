"""Benchmark harness: timed runs, anytime trace CSVs and summary aggregation.

All CSV files start with a ``# csgip-<kind> v1`` comment line naming the
frozen schema, followed by a header row.
"""
from __future__ import annotations

import csv
import io
import math
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Iterable, Optional, Sequence

from scipy import stats as _st

from .baselines import BRUTE_FORCE_MAX_N, DP_MAX_N, brute_force_solve, dp_solve
from .ip_search import SearchConfig, Solution, solve
from .value_model import ValueTable, generate

SCHEMA_VERSION = 1
SOLVERS = ("ip", "dp", "brute")
TRACE_COLUMNS = ("elapsed_ms", "best_value", "ub_star", "beta", "r_bound", "cs_examined", "r_opt")
SUMMARY_COLUMNS = ("n", "distribution", "solver", "runs", "failures", "median_time_ms", "mean_time_ms",
                   "ci95_low_ms", "ci95_high_ms", "median_cs_examined", "all_agree")
REL_TOL = 1e-9


@dataclass
class TraceRow:
    elapsed_ms: float
    best_value: float
    ub_star: float
    beta: float
    r_bound: float
    cs_examined: int
    r_opt: Optional[float] = None


@dataclass
class RunRecord:
    instance_id: str
    n: int
    distribution: str
    seed: int
    solver: str
    time_ms: float = math.nan
    final_value: float = math.nan
    status: str = ""
    cs_examined: Optional[int] = None
    r_opt: Optional[float] = None
    oracle_value: Optional[float] = None
    agrees: Optional[bool] = None
    error: str = ""
    trace: list[TraceRow] = field(default_factory=list, repr=False)


RUN_COLUMNS = tuple(f.name for f in fields(RunRecord) if f.name != "trace")


def instance_id(n: int, distribution: str, seed: int) -> str:
    return f"{distribution}-n{n}-s{seed}"


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        if math.isnan(x):
            return ""
        return repr(x)
    return str(x)


def trace_rows(solution: Solution, oracle: Optional[float] = None) -> list[TraceRow]:
    rows = []
    for snap in solution.trace:
        r_opt = None
        if oracle is not None and oracle > 0:
            r_opt = snap.best_value / oracle
        rows.append(TraceRow(snap.elapsed * 1000.0, snap.best_value, snap.ub_star, snap.beta,
                             snap.r_bound, snap.cs_examined, r_opt))
    return rows


def write_trace(rows: Sequence[TraceRow], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# csgip-trace v{SCHEMA_VERSION}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for r in rows:
            w.writerow([_fmt(getattr(r, c)) for c in TRACE_COLUMNS])


def _float(x: str) -> float:
    return math.nan if x == "" else float(x)


def read_trace(path) -> list[TraceRow]:
    with open(path, newline="") as fh:
        first = fh.readline()
        if not first.startswith("# csgip-trace"):
            raise ValueError(f"{path}: not a trace file")
        rows = []
        for rec in csv.DictReader(fh):
            rows.append(TraceRow(
                _float(rec["elapsed_ms"]), _float(rec["best_value"]), _float(rec["ub_star"]),
                _float(rec["beta"]), _float(rec["r_bound"]), int(rec["cs_examined"]),
                None if rec["r_opt"] == "" else float(rec["r_opt"])))
        return rows


def validate_trace(rows: Sequence[TraceRow], completed_optimal: bool = False) -> list[str]:
    """Problems found in a trace; an empty list means it is valid."""
    problems = []
    for i in range(1, len(rows)):
        a, b = rows[i - 1], rows[i]
        if b.best_value < a.best_value:
            problems.append(f"row {i}: best_value decreased")
        if b.ub_star > a.ub_star:
            problems.append(f"row {i}: ub_star increased")
        if b.beta > a.beta:
            problems.append(f"row {i}: beta increased")
        if b.elapsed_ms < a.elapsed_ms:
            problems.append(f"row {i}: time went backwards")
    for i, r in enumerate(rows):
        if r.best_value > r.ub_star:
            problems.append(f"row {i}: best_value above ub_star")
        if r.best_value > 0 and not 0 < r.r_bound <= 1:
            problems.append(f"row {i}: r_bound {r.r_bound} outside (0, 1]")
        if r.r_opt is not None and r.r_opt > 1 + REL_TOL:
            problems.append(f"row {i}: r_opt above 1")
    if completed_optimal and rows and abs(rows[-1].beta - 1.0) > REL_TOL:
        problems.append("final beta is not 1 for a completed optimal run")
    return problems


def run_solver(table: ValueTable, solver: str, config: SearchConfig | None = None,
               oracle: Optional[float] = None) -> RunRecord:
    rec = RunRecord(instance_id(table.n, table.distribution, table.seed), table.n,
                    table.distribution, table.seed, solver)
    if solver == "ip":
        sol = solve(table, config)
        rec.time_ms = sol.elapsed * 1000.0
        rec.final_value = sol.value
        rec.status = sol.status
        rec.cs_examined = sol.cs_examined
        rec.trace = trace_rows(sol, oracle)
    elif solver in ("dp", "brute"):
        fn = dp_solve if solver == "dp" else brute_force_solve
        t0 = time.perf_counter()
        _, value = fn(table)
        rec.time_ms = (time.perf_counter() - t0) * 1000.0
        rec.final_value = value
        rec.status = "optimal"
    else:
        raise ValueError(f"unknown solver {solver!r}; expected one of {SOLVERS}")
    if oracle is not None:
        rec.oracle_value = oracle
        if oracle > 0:
            rec.r_opt = rec.final_value / oracle
        rec.agrees = abs(rec.final_value - oracle) <= REL_TOL * max(1.0, abs(oracle))
    return rec


def oracle_value(table: ValueTable) -> Optional[float]:
    """Exact optimum when the instance is small enough for the DP, else None."""
    if table.n > DP_MAX_N:
        return None
    return dp_solve(table)[1]


def warm_up() -> None:
    """Compile or load every kernel so that timings exclude JIT work."""
    t = generate(5, "uniform", 0)
    solve(t)
    dp_solve(t)
    brute_force_solve(t)


def _bench_instance(args):
    n, dist, seed, solvers, trace_dir = args
    out = []
    try:
        table = generate(n, dist, seed)
        table.by_mask
        oracle = oracle_value(table)
    except Exception as exc:  # recorded per row, the sweep continues
        return [RunRecord(instance_id(n, dist, seed), n, dist, seed, s, error=repr(exc)) for s in solvers]
    for s in solvers:
        try:
            if s == "brute" and n > BRUTE_FORCE_MAX_N:
                raise ValueError(f"brute force skipped for n={n}")
            rec = run_solver(table, s, oracle=oracle)
            if s == "ip" and trace_dir is not None:
                write_trace(rec.trace, Path(trace_dir) / f"{rec.instance_id}.csv")
        except Exception as exc:
            rec = RunRecord(instance_id(n, dist, seed), n, dist, seed, s, error=repr(exc))
        out.append(rec)
    return out


def _init_worker():
    warm_up()


def worker_count() -> int:
    cap = os.environ.get("CSG_THREADS")
    cpus = os.cpu_count() or 1
    if cap:
        return max(1, min(cpus, int(cap)))
    return cpus


def run_sweep(n_values: Iterable[int], distributions: Sequence[str], seeds: Sequence[int],
              solvers: Sequence[str], trace_dir=None, workers: Optional[int] = None) -> list[RunRecord]:
    seeds = list(seeds)
    if not seeds:
        raise ValueError("seed list is empty")
    for s in solvers:
        if s not in SOLVERS:
            raise ValueError(f"unknown solver {s!r}")
    jobs = [(n, d, seed, tuple(solvers), trace_dir) for n in n_values for d in distributions for seed in seeds]
    workers = worker_count() if workers is None else workers
    records: list[RunRecord] = []
    if workers <= 1:
        warm_up()
        for job in jobs:
            records.extend(_bench_instance(job))
    else:
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker) as pool:
            for batch in pool.map(_bench_instance, jobs):
                records.extend(batch)
    return records


def runs_csv(records: Sequence[RunRecord]) -> str:
    buf = io.StringIO()
    buf.write(f"# csgip-runs v{SCHEMA_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RUN_COLUMNS)
    for r in records:
        w.writerow([_fmt(getattr(r, c)) for c in RUN_COLUMNS])
    return buf.getvalue()


def read_runs(text: str) -> list[dict]:
    lines = text.splitlines(keepends=True)
    if not lines or not lines[0].startswith("# csgip-runs"):
        raise ValueError("not a runs file")
    return list(csv.DictReader(io.StringIO("".join(lines[1:]))))


def _row_get(row, key):
    return row[key] if isinstance(row, dict) else getattr(row, key)


def _ci95(xs: list[float]) -> tuple[float, float]:
    if len(xs) < 2:
        return math.nan, math.nan
    mean = statistics.fmean(xs)
    half = float(_st.t.ppf(0.975, len(xs) - 1)) * statistics.stdev(xs) / math.sqrt(len(xs))
    return mean - half, mean + half


def aggregate(rows: Iterable) -> str:
    """Summary CSV text with one line per (n, distribution, solver).

    ``rows`` may be :class:`RunRecord` objects or dicts as read back from a
    runs file; both give the same bytes.
    """
    groups: dict[tuple, list] = {}
    for row in rows:
        key = (int(_row_get(row, "n")), str(_row_get(row, "distribution")), str(_row_get(row, "solver")))
        groups.setdefault(key, []).append(row)
    buf = io.StringIO()
    buf.write(f"# csgip-summary v{SCHEMA_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for key in sorted(groups):
        rows_k = groups[key]
        ok = [r for r in rows_k if not _row_get(r, "error")]
        times = [float(_row_get(r, "time_ms")) for r in ok]
        examined = [float(_row_get(r, "cs_examined")) for r in ok if _row_get(r, "cs_examined") not in (None, "")]
        agree = [_row_get(r, "agrees") for r in ok]
        agree = [a in (True, "true") for a in agree if a not in (None, "")]
        lo, hi = _ci95(times)
        w.writerow([
            key[0], key[1], key[2], len(rows_k), len(rows_k) - len(ok),
            _fmt(statistics.median(times) if times else math.nan),
            _fmt(statistics.fmean(times) if times else math.nan),
            _fmt(lo), _fmt(hi),
            _fmt(float(statistics.median(examined)) if examined else math.nan),
            _fmt(all(agree) if agree else None),
        ])
    return buf.getvalue()

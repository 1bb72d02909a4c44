"""Single pass over the input: best structures of one, two and n coalitions,
per-size statistics, bounds for every other subspace and the first
worst-case guarantee.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .combinatorics import (
    IntegerPartition,
    binomial,
    enumerate_partitions,
    grand_coalition,
    index_to_coalition,
    subspace_size,
)
from .value_model import SizeStats, ValueTable

UNSEARCHED = "unsearched"
SEARCHED = "searched"
PRUNED = "pruned"

# relative slack on the average-based lower bound, so rounding in the sum of
# averages can never prune the subspace that attains it
_AVG_SLACK = 1e-9


@dataclass
class SubspaceStats:
    G: IntegerPartition
    max_bound: float
    avg_bound: float
    min_bound: float
    size: int
    order: int = 0
    state: str = UNSEARCHED


@dataclass
class ScanResult:
    n: int
    best_cs: tuple[int, ...]
    best_value: float
    beta: float
    stats_by_size: list[SizeStats]
    remaining: list[SubspaceStats]
    subspaces: list[SubspaceStats]
    ub_star: float
    lb_star: float
    reads: int = 0
    pruned: int = 0
    bound_available: bool = True
    searched: list[SubspaceStats] = field(default_factory=list)


def compute_bounds(G: IntegerPartition, stats_by_size: list[SizeStats]) -> tuple[float, float, float]:
    """(MAX_G, AVG_G, MIN_G) from per-size maxima, averages and minima."""
    mx = av = mn = 0.0
    for s in G.parts:
        st = stats_by_size[s - 1]
        mx += st.max_s
        av += st.avg_s
        mn += st.min_s
    return mx, av, mn


def initial_beta(ub_star: float, best_value: float, n: int, cap: bool = True) -> float:
    """min(n/2, UB*/V(CS')); infinite when the incumbent value is not positive."""
    if best_value <= 0:
        return math.inf
    ratio = ub_star / best_value
    if cap:
        # n/2 < 1 only for a single agent, where the scan is already exhaustive
        ratio = min(max(n / 2, 1.0), ratio)
    return ratio


def two_part_best(table: ValueTable, s: int) -> tuple[tuple[int, int], float, int]:
    """Best structure made of a size-s coalition and its complement.

    Entry x of the size-s list is paired with entry |L_s| - x + 1 of the
    size-(n - s) list.  When both sizes are equal only the first half of the
    list is walked.  Returns ((C, complement), value, entries read).
    """
    n = table.n
    if not 1 <= s <= n // 2:
        raise ValueError(f"s must be in 1..{n // 2}")
    vs = table.list_for(s)
    vh = table.list_for(n - s)
    total = vs.size
    end = total // 2 if s == n - s else total
    sums = vs[:end] + vh[::-1][:end]
    x = int(np.argmax(sums))
    c = index_to_coalition(x + 1, s, n)
    return (c, grand_coalition(n) ^ c), float(sums[x]), 2 * end


def scan_and_search(table: ValueTable, allowed: Callable[[IntegerPartition], bool] | None = None) -> ScanResult:
    """Scan the input once and prepare the subspace search.

    ``allowed`` restricts the space to partitions it accepts; levels 1, 2 and
    n only contribute incumbents from accepted partitions and bounds are taken
    over accepted partitions only.
    """
    n = table.n
    ok = allowed if allowed is not None else (lambda G: True)
    A = grand_coalition(n)
    reads = 0

    # per-size statistics; one read of every entry
    stats = []
    for s in range(1, n + 1):
        v = table.list_for(s)
        reads += v.size
        stats.append(SizeStats(s, float(v.max()), float(v.min()), math.fsum(v) / v.size))

    best_cs: tuple[int, ...] = ()
    best_value = -math.inf

    def offer(cs, value, G):
        nonlocal best_cs, best_value
        if ok(G) and value > best_value:
            best_cs, best_value = tuple(cs), value

    grand = float(table.list_for(n)[0])
    singles = table.list_for(1)
    offer((A,), grand, IntegerPartition((n,)))
    if n > 1:
        offer(tuple(1 << i for i in range(n)), math.fsum(singles), IntegerPartition((1,) * n))
    for s in range(1, n // 2 + 1):
        if n == 2:
            break  # the only two-part structure is the all-singletons one
        G = IntegerPartition((s, n - s))
        if not ok(G):
            continue
        cs, value, r = two_part_best(table, s)
        reads += r
        offer(cs, value, G)

    subspaces = []
    for order, G in enumerate(enumerate_partitions(n)):
        if 3 <= len(G) <= n - 1 and ok(G):
            mx, av, mn = compute_bounds(G, stats)
            subspaces.append(SubspaceStats(G, mx, av, mn, subspace_size(G), order))
    if best_value == -math.inf and not subspaces:
        raise ValueError("no coalition structure satisfies the constraints")

    ub_star = max([best_value] + [sp.max_bound for sp in subspaces])
    lb_star = max([best_value] + [sp.avg_bound for sp in subspaces])
    lb_prune = lb_star - _AVG_SLACK * abs(lb_star) if lb_star > best_value else lb_star
    remaining = []
    pruned = 0
    for sp in subspaces:
        if sp.max_bound <= best_value or (lb_star > best_value and sp.max_bound < lb_prune):
            sp.state = PRUNED
            pruned += 1
        else:
            remaining.append(sp)
    beta = initial_beta(ub_star, best_value, n, cap=allowed is None)
    return ScanResult(
        n=n,
        best_cs=best_cs,
        best_value=best_value,
        beta=beta,
        stats_by_size=stats,
        remaining=remaining,
        subspaces=subspaces,
        ub_star=ub_star,
        lb_star=lb_star,
        reads=reads,
        pruned=pruned,
        bound_available=best_value > 0,
    )

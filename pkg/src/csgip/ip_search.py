"""Anytime select / search / prune loop over integer-partition subspaces."""
from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

import numpy as np

from . import _kernels
from .combinatorics import CombinationCursor, IntegerPartition
from .scan import PRUNED, SEARCHED, SubspaceStats, scan_and_search
from .value_model import ValueTable

MAX_UPPER_BOUND = "max_upper_bound"
SMALLEST_PROMISING = "smallest_promising"
POLICIES = (MAX_UPPER_BOUND, SMALLEST_PROMISING)

OPTIMAL = "optimal"
WITHIN_BETA_STAR = "within_beta_star"
TIME_LIMITED = "time_limited"

DEFAULT_BUDGET = 1 << 18


@dataclass(frozen=True)
class SearchConfig:
    beta_star: float = 1.0
    policy: str = MAX_UPPER_BOUND
    part_count: Optional[int] = None
    max_part: Optional[int] = None
    time_limit: Optional[float] = None  # seconds
    snapshot_interval: float = 0.1  # seconds

    def __post_init__(self):
        if not self.beta_star >= 1:
            raise ValueError("beta_star must be >= 1")
        if self.policy not in POLICIES:
            raise ValueError(f"unknown policy {self.policy!r}")

    @property
    def constrained(self) -> bool:
        return self.part_count is not None or self.max_part is not None

    def allows(self, G: IntegerPartition) -> bool:
        if self.part_count is not None and len(G) != self.part_count:
            return False
        if self.max_part is not None and max(G.parts) > self.max_part:
            return False
        return True


@dataclass(frozen=True)
class AnytimeSnapshot:
    elapsed: float  # seconds since solve started
    best_value: float
    ub_star: float
    lb_star: float
    beta: float
    searched: int
    pruned: int
    remaining: int
    cs_examined: int

    @property
    def r_bound(self) -> float:
        if self.best_value <= 0 or self.ub_star <= 0:
            return math.nan
        return self.best_value / self.ub_star


@dataclass
class Solution:
    cs: tuple[int, ...]
    value: float
    beta_final: float
    status: str
    trace: list[AnytimeSnapshot] = field(default_factory=list)
    cs_examined: int = 0
    elapsed: float = 0.0
    entered: list[IntegerPartition] = field(default_factory=list)


def prune(remaining: list[SubspaceStats], threshold: float) -> list[SubspaceStats]:
    """Drop subspaces whose upper bound is at most ``threshold``; marks them pruned."""
    kept = []
    for sp in remaining:
        if sp.max_bound <= threshold:
            sp.state = PRUNED
        else:
            kept.append(sp)
    return kept


def _max_key(sp: SubspaceStats):
    return (-sp.max_bound, sp.size, sp.order)


def select_next(remaining: list[SubspaceStats], policy: str = MAX_UPPER_BOUND,
                ub_star: float = math.inf, beta_star: float = 1.0) -> IntegerPartition:
    """Partition of the next subspace to search.

    ``max_upper_bound`` takes the highest MAX_G (ties: fewer structures, then
    canonical order).  ``smallest_promising`` takes the fewest structures among
    subspaces with MAX_G >= UB*/beta*, falling back to the first rule.
    """
    if not remaining:
        raise ValueError("no subspace left to select")
    if policy == SMALLEST_PROMISING:
        threshold = ub_star / beta_star if ub_star > 0 else ub_star
        promising = [sp for sp in remaining if sp.max_bound >= threshold]
        if promising:
            return min(promising, key=lambda sp: (sp.size, sp.order)).G
    elif policy != MAX_UPPER_BOUND:
        raise ValueError(f"unknown policy {policy!r}")
    return min(remaining, key=_max_key).G


class SubspaceSearch:
    """Resumable search of one subspace through the compiled kernel."""

    def __init__(self, G: IntegerPartition, by_mask: np.ndarray, max_by_size, incumbent: float,
                 stop_value: float = math.inf, use_bound: bool = True, record: int = 0):
        parts = np.asarray(G.parts, dtype=np.int64)
        K = parts.size
        n = int(parts.sum())
        self.G = G
        self.n = n
        self.parts = parts
        self.rep = np.array([int(np.sum(parts[k:] == parts[k])) for k in range(K)], dtype=np.int64)
        maxima = np.array([max_by_size[g - 1] for g in G.parts], dtype=np.float64)
        self.rest_max = np.append(np.cumsum(maxima[::-1])[::-1], 0.0)
        self.state = np.zeros(4, dtype=np.int64)
        self.comb = np.zeros((K, n), dtype=np.int64)
        self.avail = np.zeros((K, n), dtype=np.int64)
        self.avail_size = np.zeros(K, dtype=np.int64)
        self.prefix = np.zeros(K, dtype=np.float64)
        self.masks = np.zeros(K, dtype=np.int64)
        self.best_masks = np.zeros(K, dtype=np.int64)
        self.best = np.array([incumbent], dtype=np.float64)
        self.stop_value = float(stop_value)
        self.use_bound = use_bound
        self.record = np.zeros((record, K), dtype=np.int64)
        self.by_mask = by_mask
        self.status = None

    @property
    def examined(self) -> int:
        return int(self.state[2])

    @property
    def improved(self) -> bool:
        return bool(self.state[3])

    @property
    def best_value(self) -> float:
        return float(self.best[0])

    @property
    def best_cs(self) -> tuple[int, ...]:
        return tuple(int(m) for m in self.best_masks)

    @property
    def done(self) -> bool:
        return self.status in (_kernels.FINISHED, _kernels.STOPPED)

    def run(self, budget: int = DEFAULT_BUDGET) -> int:
        if self.best[0] >= self.stop_value:
            self.status = _kernels.STOPPED
            return self.status
        self.status = _kernels.search_subspace(
            self.by_mask, self.parts, self.rep, self.rest_max, self.state, self.comb,
            self.avail, self.avail_size, self.prefix, self.masks, self.best_masks,
            self.best, self.stop_value, self.use_bound, budget, self.record)
        return self.status

    def visited(self) -> list[tuple[int, ...]]:
        """Structures recorded so far (only when constructed with ``record``)."""
        count = min(self.examined, self.record.shape[0])
        return [tuple(int(m) for m in row) for row in self.record[:count]]


def search_subspace(G: IntegerPartition, table: ValueTable, incumbent=None,
                    max_by_size=None, stop_value: float = math.inf, use_bound: bool = True):
    """Best structure in P_G if it beats ``incumbent``.

    ``incumbent`` is ``(cs, value)`` or None.  Returns ``(cs, value, examined)``
    where ``cs``/``value`` are the incoming incumbent when nothing better exists.
    The search also ends early once the incumbent reaches MAX_G or
    ``stop_value``.
    """
    if not 3 <= len(G) <= table.n - 1:
        raise ValueError("levels with 1, 2 or n coalitions are solved by the scan")
    if max_by_size is None:
        max_by_size = [float(v.max()) for v in table.lists]
    cs, value = incumbent if incumbent is not None else ((), -math.inf)
    max_g = sum(max_by_size[g - 1] for g in G.parts)
    search = SubspaceSearch(G, table.by_mask, max_by_size, value, min(stop_value, max_g), use_bound)
    while not search.done:
        search.run()
    if search.improved:
        return search.best_cs, search.best_value, search.examined
    return tuple(cs), value, search.examined


def iter_subspace(G: IntegerPartition, n: int | None = None) -> Iterator[tuple[int, ...]]:
    """Plain-Python enumeration of P_G with the same ordering rules as the kernel.

    Coalition k is drawn from the ascending list of agents not yet used; when
    it has the same size as coalition k-1, its first chosen position may not
    precede the previous coalition's first position.
    """
    parts = G.parts
    n = G.n if n is None else n
    K = len(parts)
    rep = [parts[k:].count(parts[k]) for k in range(K)]

    def rec(k, avail, prev_first, chosen):
        g = parts[k]
        alpha = prev_first if k > 0 and parts[k] == parts[k - 1] else 1
        cursor = CombinationCursor(len(avail), g, alpha, len(avail) + 1 - g * rep[k])
        for combo in cursor:
            mask = 0
            for i in combo:
                mask |= 1 << (avail[i - 1] - 1)
            if k == K - 1:
                yield tuple(chosen + [mask])
            else:
                rest = [a for a in avail if not (mask >> (a - 1)) & 1]
                yield from rec(k + 1, rest, combo[0], chosen + [mask])

    yield from rec(0, list(range(1, n + 1)), 1, [])


class _Frontier:
    """Remaining subspaces with a lazily cleaned max-heap on MAX_G."""

    def __init__(self, subspaces: list[SubspaceStats]):
        self.live = {sp.order: sp for sp in subspaces}
        self.heap = [(*_max_key(sp), sp.order) for sp in subspaces]
        heapq.heapify(self.heap)

    def __len__(self):
        return len(self.live)

    def _clean(self):
        while self.heap and self.heap[0][-1] not in self.live:
            heapq.heappop(self.heap)

    def top(self) -> Optional[SubspaceStats]:
        self._clean()
        return self.live[self.heap[0][-1]] if self.heap else None

    def max_bound(self) -> float:
        top = self.top()
        return top.max_bound if top is not None else -math.inf

    def remove(self, sp: SubspaceStats):
        self.live.pop(sp.order, None)

    def prune(self, threshold: float) -> int:
        doomed = [sp for sp in self.live.values() if sp.max_bound <= threshold]
        prune(doomed, threshold)
        for sp in doomed:
            self.remove(sp)
        return len(doomed)

    def values(self):
        return list(self.live.values())


def _scan_evaluations(n: int, allowed) -> int:
    # structures whose value the scan computes: grand, singletons, and pairs
    if n == 1:
        return 1
    count = 2
    for s in range(1, n // 2 + 1):
        if n == 2:
            break
        G = IntegerPartition((s, n - s))
        if allowed is None or allowed(G):
            total = math.comb(n, s)
            count += total // 2 if s == n - s else total
    return count


def solve(table: ValueTable, config: SearchConfig | None = None,
          progress: Callable[[AnytimeSnapshot], None] | None = None,
          budget: int = DEFAULT_BUDGET) -> Solution:
    """Anytime search for the best coalition structure.

    Every snapshot goes to ``progress`` (if given) and to ``Solution.trace``.
    """
    config = config or SearchConfig()
    t0 = time.perf_counter()
    n = table.n
    allowed = config.allows if config.constrained else None
    scan = scan_and_search(table, allowed)
    by_mask = table.by_mask
    max_by_size = [st.max_s for st in scan.stats_by_size]

    best_cs, best_value = scan.best_cs, scan.best_value
    ub_star, lb_star, beta = scan.ub_star, scan.lb_star, scan.beta
    frontier = _Frontier(scan.remaining)
    searched = 0
    pruned = scan.pruned
    examined = _scan_evaluations(n, allowed)
    trace: list[AnytimeSnapshot] = []
    entered: list[IntegerPartition] = []
    last_emit = [0.0]

    def emit():
        snap = AnytimeSnapshot(time.perf_counter() - t0, best_value, ub_star, lb_star, beta,
                               searched, pruned, len(frontier), examined)
        trace.append(snap)
        last_emit[0] = snap.elapsed
        if progress is not None:
            progress(snap)

    def refresh_bounds(extra: float = -math.inf):
        nonlocal ub_star, beta, lb_star
        ub_star = min(ub_star, max(best_value, frontier.max_bound(), extra))
        lb_star = max(lb_star, best_value)
        if len(frontier) == 0 and extra == -math.inf:
            beta = 1.0
        elif best_value > 0:
            beta = min(beta, ub_star / best_value)

    def finish(status):
        last = trace[-1]
        if (last.best_value, last.ub_star, last.beta, last.cs_examined) != (best_value, ub_star, beta, examined):
            emit()
        return Solution(best_cs, best_value, beta, status, trace, examined,
                        time.perf_counter() - t0, entered)

    if len(frontier) == 0:
        refresh_bounds()
    emit()

    def timed_out():
        return config.time_limit is not None and time.perf_counter() - t0 >= config.time_limit

    while len(frontier):
        if beta <= config.beta_star:
            return finish(OPTIMAL if beta <= 1.0 else WITHIN_BETA_STAR)
        if timed_out():
            return finish(TIME_LIMITED)
        G = select_next(frontier.values(), config.policy, ub_star, config.beta_star)
        sp = next(s for s in frontier.values() if s.G == G)
        entered.append(G)
        stop = sp.max_bound
        beta_target = None
        if config.beta_star > 1 and ub_star > 0:
            beta_target = ub_star / config.beta_star
            stop = min(stop, beta_target)
        search = SubspaceSearch(G, by_mask, max_by_size, best_value, stop)
        base_examined = examined
        while True:
            status = search.run(budget)
            examined = base_examined + search.examined
            if search.improved and search.best_value > best_value:
                best_value = search.best_value
                best_cs = search.best_cs
                refresh_bounds(sp.max_bound)
                emit()
            elif time.perf_counter() - t0 - last_emit[0] >= config.snapshot_interval:
                emit()
            if status != _kernels.PAUSED:
                break
            if timed_out():
                refresh_bounds(sp.max_bound)
                return finish(TIME_LIMITED)
        if status == _kernels.STOPPED and best_value < sp.max_bound:
            # stopped on the acceptable-bound target: the subspace is only partly searched
            refresh_bounds(sp.max_bound)
            emit()
            return finish(OPTIMAL if beta <= 1.0 else WITHIN_BETA_STAR)
        frontier.remove(sp)
        sp.state = SEARCHED
        searched += 1
        if search.improved:
            pruned += frontier.prune(best_value)
        refresh_bounds()
        emit()
    return finish(OPTIMAL)

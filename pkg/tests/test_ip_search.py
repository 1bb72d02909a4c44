import itertools
import math
from collections import Counter

import pytest

from csgip.baselines import brute_force_solve
from csgip.combinatorics import IntegerPartition, enumerate_partitions, grand_coalition, subspace_size
from csgip.ip_search import (
    MAX_UPPER_BOUND,
    OPTIMAL,
    SMALLEST_PROMISING,
    TIME_LIMITED,
    WITHIN_BETA_STAR,
    SearchConfig,
    SubspaceSearch,
    iter_subspace,
    prune,
    search_subspace,
    select_next,
    solve,
)
from csgip.scan import PRUNED, SubspaceStats, scan_and_search
from csgip.value_model import ValueTable, generate

from conftest import brute_value, structures_by_partition

DISTS = ("uniform", "normal", "ndcs")


def stats(G, mx, size=None, order=0):
    G = IntegerPartition(G)
    return SubspaceStats(G, mx, 0.0, 0.0, size if size is not None else subspace_size(G), order)


def searchable(n):
    return [G for G in enumerate_partitions(n) if 3 <= len(G) <= n - 1]


def full_visit(G, record):
    n = G.n
    by_mask = generate(n, "uniform", 0).by_mask
    s = SubspaceSearch(G, by_mask, [0.0] * n, -math.inf, use_bound=False, record=record)
    while not s.done:
        s.run()
    return s


def test_prune_examples():
    sps = [stats((1, 1, 2), 10.0), stats((1, 3), 7.0, order=1)]
    assert prune(list(sps), -math.inf) == sps
    assert prune(list(sps), 10.0) == []
    assert all(sp.state == PRUNED for sp in sps)
    kept = prune([stats((1, 1, 2), 10.0), stats((1, 3), 7.0, order=1)], 7.0)
    assert [sp.max_bound for sp in kept] == [10.0]


def test_prune_keeps_optimal_partition():
    for seed in range(10):
        t = generate(8, "uniform", seed)
        cs, value = brute_force_solve(t)
        G = IntegerPartition(tuple(bin(c).count("1") for c in cs))
        r = scan_and_search(t)
        if len(G) in (1, 2, 8):
            continue
        kept = prune(list(r.subspaces), value - 1e-9)
        assert G in {sp.G for sp in kept}


def test_select_next_policies():
    a, b = stats((1, 1, 2), 10.0, order=0), stats((1, 3), 7.0, order=1)
    assert select_next([b, a]) == a.G
    with pytest.raises(ValueError):
        select_next([])
    big = stats((1, 1, 1, 3), 9.0, size=20, order=2)
    small = stats((1, 2, 3), 9.0, size=60, order=3)
    tiny = stats((2, 2, 2), 8.0, size=15, order=4)
    assert select_next([big, small, tiny], SMALLEST_PROMISING, ub_star=9.0, beta_star=1.0) == big.G
    assert select_next([big, small, tiny], SMALLEST_PROMISING, ub_star=9.0, beta_star=1.2) == tiny.G
    assert select_next([tiny], SMALLEST_PROMISING, ub_star=9.0, beta_star=1.0) == tiny.G


def test_select_next_tie_breaks_deterministic():
    sps = [stats((1, 1, 4), 5.0, size=30, order=3), stats((2, 2, 2), 5.0, size=15, order=5),
           stats((1, 2, 3), 5.0, size=15, order=4)]
    picks = {select_next(list(p), MAX_UPPER_BOUND) for p in itertools.permutations(sps)}
    assert picks == {IntegerPartition((1, 2, 3))}


def test_seven_agents_223_visits_105():
    G = IntegerPartition((2, 2, 3))
    s = full_visit(G, 200)
    visited = s.visited()
    assert s.examined == 105 == len(set(visited))


def test_incumbent_at_max_returns_immediately():
    t = generate(7, "uniform", 3)
    mx = [float(v.max()) for v in t.lists]
    G = IntegerPartition((1, 2, 4))
    max_g = mx[0] + mx[1] + mx[3]
    cs, value, examined = search_subspace(G, t, incumbent=((grand_coalition(7),), max_g))
    assert examined == 0 and value == max_g and cs == (grand_coalition(7),)


def test_search_subspace_rejects_scan_levels():
    t = generate(5, "uniform", 0)
    for parts in [(5,), (2, 3), (1, 1, 1, 1, 1)]:
        with pytest.raises(ValueError):
            search_subspace(IntegerPartition(parts), t)


@pytest.mark.parametrize("kind", DISTS)
def test_search_subspace_matches_subspace_brute_force(kind):
    n = 8
    by_part = structures_by_partition(n)
    for seed in range(3):
        t = generate(n, kind, seed)
        for G in searchable(n):
            cs, value, _ = search_subspace(G, t)
            best = max(brute_value(t, c) for c in by_part[G.parts])
            assert value == pytest.approx(best, rel=1e-12, abs=1e-12)
            assert brute_value(t, cs) == pytest.approx(value, rel=1e-12, abs=1e-12)
            assert tuple(sorted(bin(c).count("1") for c in cs)) == G.parts


@pytest.mark.parametrize("n", range(3, 9))
def test_kernel_visits_each_structure_once(n):
    by_part = structures_by_partition(n)
    for G in searchable(n):
        s = full_visit(G, subspace_size(G) + 1)
        visited = s.visited()
        assert s.examined == subspace_size(G)
        expected = Counter(frozenset(cs) for cs in by_part[G.parts])
        assert Counter(frozenset(cs) for cs in visited) == expected
        A = grand_coalition(n)
        for cs in visited:
            acc = 0
            for c in cs:
                assert acc & c == 0
                acc |= c
            assert acc == A


@pytest.mark.parametrize("n", range(3, 8))
def test_python_reference_matches_kernel(n):
    for G in searchable(n):
        s = full_visit(G, subspace_size(G))
        assert list(iter_subspace(G)) == s.visited()


@pytest.mark.parametrize("kind", DISTS)
def test_branch_and_bound_safety(kind):
    n = 8
    for seed in range(4):
        t = generate(n, kind, 50 + seed)
        r = scan_and_search(t)
        inc = (r.best_cs, r.best_value)
        for G in searchable(n):
            on = search_subspace(G, t, incumbent=inc)
            off = search_subspace(G, t, incumbent=inc, use_bound=False)
            assert on[1] == off[1]
            assert on[2] <= off[2]


@pytest.mark.parametrize("kind", DISTS)
@pytest.mark.parametrize("n", range(4, 11))
def test_solve_matches_oracle(kind, n):
    for seed in range(5):
        t = generate(n, kind, seed)
        sol = solve(t)
        _, opt = brute_force_solve(t)
        assert sol.value == pytest.approx(opt, rel=1e-9, abs=1e-12)
        assert brute_value(t, sol.cs) == pytest.approx(sol.value, rel=1e-12, abs=1e-12)
        assert sol.status == OPTIMAL and abs(sol.beta_final - 1.0) <= 1e-9


def test_beta_star_half_n_returns_after_scan():
    for kind in ("uniform", "normal"):
        t = generate(12, kind, 1)
        sol = solve(t, SearchConfig(beta_star=6.0))
        assert sol.entered == []
        assert sol.status in (OPTIMAL, WITHIN_BETA_STAR)
        assert len(sol.trace) == 1


def test_beta_star_result_is_within_bound():
    for seed in range(10):
        t = generate(10, "uniform", seed)
        sol = solve(t, SearchConfig(beta_star=1.05))
        _, opt = brute_force_solve(t)
        assert opt <= 1.05 * sol.value * (1 + 1e-12)
        assert sol.beta_final <= 1.05


def test_constraints_against_filtered_brute_force():
    n = 8
    cfg = SearchConfig(part_count=3, max_part=4)
    by_part = structures_by_partition(n)
    allowed = [p for p in by_part if len(p) == 3 and max(p) <= 4]
    for seed in range(5):
        t = generate(n, "normal", seed)
        sol = solve(t, cfg)
        best = max(brute_value(t, cs) for p in allowed for cs in by_part[p])
        assert sol.value == pytest.approx(best, rel=1e-12)
        assert len(sol.cs) == 3 and max(bin(c).count("1") for c in sol.cs) <= 4


@pytest.mark.parametrize("kind", DISTS)
def test_trace_invariants(kind):
    for seed in range(5):
        t = generate(10, kind, seed)
        seen = []
        sol = solve(t, progress=seen.append, budget=64)
        _, opt = brute_force_solve(t)
        assert seen == sol.trace and len(sol.trace) >= 2
        for a, b in zip(sol.trace, sol.trace[1:]):
            assert b.best_value >= a.best_value
            assert b.ub_star <= a.ub_star
            assert b.beta <= a.beta
            assert b.elapsed >= a.elapsed
        for snap in sol.trace:
            assert snap.best_value <= snap.ub_star
            assert opt <= snap.ub_star + 1e-9 * abs(opt)
            if snap.best_value > 0:
                assert opt <= snap.beta * snap.best_value * (1 + 1e-9)
        assert sol.trace[0].beta <= 10 / 2 or sol.trace[0].best_value <= 0
        # never-search guarantee
        for G in sol.entered:
            mx = sum(float(t.list_for(g).max()) for g in G.parts)
            assert mx >= sol.value
        assert sol.trace[-1].searched == len(sol.entered)


def test_time_limit():
    t = generate(18, "ndcs", 0)
    sol = solve(t, SearchConfig(time_limit=0.0))
    assert sol.status == TIME_LIMITED
    assert sol.value >= t.value(grand_coalition(18))
    assert sol.trace and sol.trace[-1].best_value == sol.value


def test_smallest_promising_policy_is_exact():
    for seed in range(5):
        t = generate(9, "normal", seed)
        a = solve(t, SearchConfig(policy=SMALLEST_PROMISING))
        _, opt = brute_force_solve(t)
        assert a.value == pytest.approx(opt, rel=1e-12)


def test_search_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(beta_star=0.5)
    with pytest.raises(ValueError):
        SearchConfig(policy="random")


def test_nonpositive_incumbent_reports_infinite_beta():
    t = ValueTable.from_function(5, lambda m: -1.0 * bin(m).count("1") ** 2)
    r = scan_and_search(t)
    assert r.beta == math.inf and not r.bound_available
    sol = solve(t)
    assert sol.value == -5.0 and sol.beta_final == 1.0
    assert sol.trace[-1].r_bound != sol.trace[-1].r_bound  # nan without a positive incumbent

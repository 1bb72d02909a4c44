"""Exact reference solvers: exhaustive enumeration and O(3^n) dynamic programming."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import _kernels
from .combinatorics import grand_coalition
from .value_model import ValueTable

BRUTE_FORCE_MAX_N = 13
DP_MAX_N = 22


class ProblemTooLarge(ValueError):
    pass


def enumerate_all_cs(n: int) -> Iterator[tuple[int, ...]]:
    """Every coalition structure of ``n`` agents, once, via restricted growth strings."""
    if n > BRUTE_FORCE_MAX_N:
        raise ProblemTooLarge(f"refusing to enumerate set partitions of {n} > {BRUTE_FORCE_MAX_N} agents")
    if n < 1:
        raise ValueError("n must be at least 1")
    rgs = [0] * n
    while True:
        blocks = [0] * (max(rgs) + 1)
        for agent, b in enumerate(rgs):
            blocks[b] |= 1 << agent
        yield tuple(blocks)
        # rightmost position that can still grow: rgs[i] <= max(rgs[:i])
        i = n - 1
        while i > 0 and rgs[i] > max(rgs[:i]):
            i -= 1
        if i == 0:
            return
        rgs[i] += 1
        for j in range(i + 1, n):
            rgs[j] = 0


def _rgs_to_cs(rgs) -> tuple[int, ...]:
    blocks = [0] * (int(max(rgs)) + 1)
    for agent, b in enumerate(rgs):
        blocks[int(b)] |= 1 << agent
    return tuple(blocks)


def brute_force_solve(table: ValueTable) -> tuple[tuple[int, ...], float]:
    """Exhaustive optimum; ties resolve to the first structure in enumeration order."""
    n = table.n
    if n > BRUTE_FORCE_MAX_N:
        raise ProblemTooLarge(f"brute force is limited to n <= {BRUTE_FORCE_MAX_N}")
    value, rgs, _ = _kernels.brute_force(table.by_mask, n)
    return _rgs_to_cs(rgs), float(value)


@dataclass
class DpTables:
    best_value: np.ndarray
    best_split: np.ndarray
    split_evaluations: int


def dp_tables(table: ValueTable) -> DpTables:
    if table.n > DP_MAX_N:
        raise ProblemTooLarge(f"dynamic programming is limited to n <= {DP_MAX_N}")
    best, split, evals = _kernels.dp_tables(table.by_mask, table.n)
    return DpTables(best, split, int(evals))


def dp_reconstruct(tables: DpTables, mask: int) -> tuple[int, ...]:
    out = []
    stack = [mask]
    while stack:
        S = stack.pop()
        sub = int(tables.best_split[S])
        if sub == S:
            out.append(S)
        else:
            stack.extend((sub, S ^ sub))
    return tuple(sorted(out, key=lambda m: m & -m))


def dp_solve(table: ValueTable) -> tuple[tuple[int, ...], float]:
    tables = dp_tables(table)
    A = grand_coalition(table.n)
    return dp_reconstruct(tables, A), float(tables.best_value[A])

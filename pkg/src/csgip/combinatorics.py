"""Coalition bitsets, lexicographic combination ranking and partition counting.

Agents are numbered 1..n and agent ``i`` occupies bit ``i - 1`` of a
coalition mask.  Lists of equal-sized coalitions are ordered ascending
lexicographically on their sorted agent tuples, so for six agents the first
entry of the size-3 list is {a1, a2, a3} and the last one is {a4, a5, a6}.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

MAX_AGENTS = 30
_LIMIT_128 = 1 << 128


def _check_128(x: int) -> int:
    if x >= _LIMIT_128:
        raise OverflowError(f"count {x} does not fit in 128 bits")
    return x


def binomial(m: int, s: int) -> int:
    """Exact binomial coefficient, 0 when ``s > m``."""
    if m < 0 or s < 0:
        raise ValueError("binomial arguments must be non-negative")
    return _check_128(math.comb(m, s))


# ---------------------------------------------------------------------------
# coalitions as bitmasks


def coalition(*agents: int) -> int:
    """Mask for the given 1-based agents, e.g. ``coalition(1, 3)`` -> 0b101."""
    mask = 0
    for a in agents:
        if a < 1:
            raise ValueError(f"agent indices start at 1, got {a}")
        mask |= 1 << (a - 1)
    return mask


def members(mask: int) -> tuple[int, ...]:
    """Sorted 1-based agents of a coalition mask."""
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def grand_coalition(n: int) -> int:
    return (1 << n) - 1


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def format_cs(cs: Iterable[int]) -> str:
    """Human readable coalition structure, ``{{a1,a2},{a3}}``."""
    blocks = sorted(members(c) for c in cs)
    inner = ",".join("{" + ",".join(f"a{i}" for i in b) + "}" for b in blocks)
    return "{" + inner + "}"


def _universe(universe: int | Sequence[int]) -> tuple[int, ...]:
    if isinstance(universe, int):
        return tuple(range(1, universe + 1))
    agents = tuple(universe)
    if list(agents) != sorted(set(agents)):
        raise ValueError("universe must be strictly increasing")
    return agents


def index_to_coalition(x: int, s: int, universe: int | Sequence[int]) -> int:
    """Coalition at 1-based position ``x`` of the size-``s`` list over ``universe``.

    ``universe`` is either the agent count ``n`` (agents 1..n) or an ascending
    sequence of agent indices.
    """
    agents = _universe(universe)
    m = len(agents)
    total = binomial(m, s)
    if not 1 <= x <= total:
        raise IndexError(f"index {x} outside 1..{total} for C({m},{s})")
    r = x - 1
    mask = 0
    pos = 0
    for remaining in range(s, 0, -1):
        # skip over blocks of combinations that start before the next chosen position
        while True:
            block = math.comb(m - pos - 1, remaining - 1)
            if r < block:
                break
            r -= block
            pos += 1
        mask |= 1 << (agents[pos] - 1)
        pos += 1
    return mask


def coalition_to_index(mask: int, universe: int | Sequence[int]) -> int:
    """Inverse of :func:`index_to_coalition`; the size is implied by the mask."""
    agents = _universe(universe)
    where = {a: i for i, a in enumerate(agents)}
    try:
        positions = [where[a] for a in members(mask)]
    except KeyError as exc:
        raise ValueError(f"agent {exc.args[0]} is not in the universe") from None
    if not positions:
        raise ValueError("empty coalition has no index")
    m = len(agents)
    s = len(positions)
    r = 0
    prev = -1
    for i, p in enumerate(positions):
        remaining = s - i
        for q in range(prev + 1, p):
            r += math.comb(m - q - 1, remaining - 1)
        prev = p
    return r + 1


def complement_index(x: int, s: int, n: int) -> int:
    """Position in the size-``(n - s)`` list of the complement of entry ``x`` of the size-``s`` list."""
    total = binomial(n, s)
    if not 1 <= x <= total:
        raise IndexError(f"index {x} outside 1..{total}")
    return total - x + 1


class CombinationCursor:
    """Walks the ``s``-subsets of {1..m} in ascending lexicographic order.

    The cursor starts on the first combination whose smallest element is at
    least ``first_min`` and stops once the smallest element would exceed
    ``first_max``.
    """

    def __init__(self, m: int, s: int, first_min: int = 1, first_max: int | None = None):
        if s < 1 or s > m:
            raise ValueError(f"cannot choose {s} of {m}")
        self.m = m
        self.s = s
        self.first_max = m - s + 1 if first_max is None else min(first_max, m - s + 1)
        self.current: list[int] | None = None
        if first_min <= self.first_max:
            self.current = list(range(first_min, first_min + s))

    @property
    def first_element(self) -> int:
        return self.current[0]

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        while self.current is not None:
            yield tuple(self.current)
            self.advance()

    def advance(self) -> bool:
        c = self.current
        if c is None:
            return False
        m, s = self.m, self.s
        i = s - 1
        while i >= 0 and c[i] == m - s + i + 1:
            i -= 1
        if i < 0:
            self.current = None
            return False
        c[i] += 1
        for j in range(i + 1, s):
            c[j] = c[j - 1] + 1
        if c[0] > self.first_max:
            self.current = None
            return False
        return True


# ---------------------------------------------------------------------------
# integer partitions


@dataclass(frozen=True, order=False)
class IntegerPartition:
    """Multiset of coalition sizes, stored as a non-decreasing tuple."""

    parts: tuple[int, ...]

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if not parts or min(parts) < 1:
            raise ValueError(f"invalid integer partition {self.parts!r}")
        object.__setattr__(self, "parts", tuple(sorted(parts)))

    @property
    def n(self) -> int:
        return sum(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)

    def multiplicity(self, s: int) -> int:
        return self.parts.count(s)

    def underlying_set(self) -> frozenset[int]:
        return frozenset(self.parts)

    def sort_key(self) -> tuple:
        """Canonical order: fewer parts first, then lexicographic."""
        return (len(self.parts), self.parts)

    def __repr__(self) -> str:
        return "[" + ",".join(map(str, self.parts)) + "]"


def _partitions_nondecreasing(n: int, smallest: int) -> Iterator[tuple[int, ...]]:
    yield (n,)
    for first in range(smallest, n // 2 + 1):
        for rest in _partitions_nondecreasing(n - first, first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def _partitions_cached(n: int) -> tuple[IntegerPartition, ...]:
    parts = sorted(_partitions_nondecreasing(n, 1), key=lambda p: (len(p), p))
    return tuple(IntegerPartition(p) for p in parts)


def enumerate_partitions(n: int) -> list[IntegerPartition]:
    """All integer partitions of ``n``, grouped by part count then lexicographic."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if n > 128:
        raise ValueError("partition enumeration is limited to n <= 128")
    return list(_partitions_cached(n))


def subspace_size(G: IntegerPartition | Sequence[int]) -> int:
    """Number of coalition structures whose coalition sizes form ``G``."""
    parts = G.parts if isinstance(G, IntegerPartition) else tuple(sorted(G))
    remaining = sum(parts)
    num = 1
    for g in parts:
        num *= math.comb(remaining, g)
        remaining -= g
    den = 1
    for s in set(parts):
        den *= math.factorial(parts.count(s))
    return _check_128(num // den)


def partition_of(cs: Iterable[int], n: int | None = None) -> IntegerPartition:
    """Size multiset of a coalition structure; checks disjointness and coverage."""
    seen = 0
    sizes = []
    for c in cs:
        if c <= 0:
            raise ValueError("coalition structures cannot contain empty coalitions")
        if seen & c:
            raise ValueError("coalitions overlap")
        seen |= c
        sizes.append(popcount(c))
    if not sizes:
        raise ValueError("empty coalition structure")
    if n is None:
        n = seen.bit_length()
    if seen != grand_coalition(n):
        raise ValueError("coalition structure does not cover every agent")
    return IntegerPartition(tuple(sizes))


def bell_number(n: int) -> int:
    """Bell number via the Bell triangle (independent of subspace counting)."""
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]

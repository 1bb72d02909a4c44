"""Characteristic-function tables, benchmark value distributions and instance files.

A :class:`ValueTable` keeps one float64 array per coalition size ``s``,
index-aligned with the lexicographic coalition list of that size.  The
bitmask-indexed view used by the compiled kernels is derived lazily.

Random instances use numpy's PCG64 bit generator.  Values are drawn in one
vectorised call per size, sizes ascending, indices ascending; normal draws use
``Generator.normal`` (ziggurat).
"""
from __future__ import annotations

import csv
import io
import math
import os
import struct
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np

from . import _kernels
from .combinatorics import (
    MAX_AGENTS,
    binomial,
    coalition_to_index,
    enumerate_partitions,
    grand_coalition,
    partition_of,
    popcount,
    subspace_size,
)

DISTRIBUTIONS = ("uniform", "normal", "ndcs")
_TAGS = {"custom": 0, "uniform": 1, "normal": 2, "ndcs": 3}
_TAG_NAMES = {v: k for k, v in _TAGS.items()}

MAGIC = b"CSGV"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHHBQ")


class InstanceFileError(ValueError):
    """Base class for unreadable instance files."""


class InstanceFormatError(InstanceFileError):
    pass


class InstanceLengthError(InstanceFileError):
    pass


class NonFiniteValueError(InstanceFileError):
    pass


@dataclass(frozen=True)
class DistributionSpec:
    kind: str
    seed: int = 0

    def __post_init__(self):
        if self.kind not in DISTRIBUTIONS:
            raise ValueError(f"unknown distribution {self.kind!r}; expected one of {DISTRIBUTIONS}")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")


@dataclass(frozen=True)
class SizeStats:
    s: int
    max_s: float
    min_s: float
    avg_s: float


@lru_cache(maxsize=64)
def lex_masks(n: int, s: int) -> np.ndarray:
    """Coalition masks of size ``s`` in canonical list order (read-only)."""
    out = _kernels.lex_masks(n, s)
    out.setflags(write=False)
    return out


def _check_n(n: int) -> None:
    if not 1 <= n <= MAX_AGENTS:
        raise ValueError(f"number of agents must be in 1..{MAX_AGENTS}, got {n}")


class ValueTable:
    """Coalition values for ``n`` agents, ``lists[s - 1]`` holding size ``s``."""

    def __init__(self, n: int, lists: Iterable[np.ndarray], distribution: str = "custom", seed: int = 0):
        _check_n(n)
        lists = [np.array(v, dtype=np.float64) for v in lists]
        if len(lists) != n:
            raise ValueError(f"expected {n} size lists, got {len(lists)}")
        for s, v in enumerate(lists, start=1):
            if v.shape != (binomial(n, s),):
                raise ValueError(f"size-{s} list has {v.size} values, expected {binomial(n, s)}")
            if not np.all(np.isfinite(v)):
                raise ValueError(f"size-{s} list contains non-finite values")
        self.n = n
        self.lists = lists
        self.distribution = distribution
        self.seed = seed
        self._by_mask: np.ndarray | None = None

    @classmethod
    def from_function(cls, n: int, fn) -> "ValueTable":
        """Build a table from ``fn(mask) -> value`` (convenient for small tests)."""
        lists = [np.array([fn(int(m)) for m in lex_masks(n, s)], dtype=np.float64) for s in range(1, n + 1)]
        return cls(n, lists)

    @classmethod
    def from_by_mask(cls, n: int, by_mask: np.ndarray) -> "ValueTable":
        by_mask = np.asarray(by_mask, dtype=np.float64)
        return cls(n, [by_mask[lex_masks(n, s)] for s in range(1, n + 1)])

    def list_for(self, s: int) -> np.ndarray:
        return self.lists[s - 1]

    @property
    def by_mask(self) -> np.ndarray:
        if self._by_mask is None:
            arr = np.zeros(1 << self.n, dtype=np.float64)
            for s in range(1, self.n + 1):
                arr[lex_masks(self.n, s)] = self.lists[s - 1]
            arr.setflags(write=False)
            self._by_mask = arr
        return self._by_mask

    def value(self, mask: int) -> float:
        mask = int(mask)
        if mask <= 0:
            raise ValueError("the empty coalition has no value")
        if mask > grand_coalition(self.n):
            raise ValueError("coalition contains agents outside 1..n")
        s = popcount(mask)
        return float(self.lists[s - 1][coalition_to_index(mask, self.n) - 1])

    def set_value(self, mask: int, v: float) -> None:
        if not math.isfinite(v):
            raise ValueError("coalition values must be finite")
        s = popcount(mask)
        self.lists[s - 1][coalition_to_index(mask, self.n) - 1] = v
        self._by_mask = None

    def value_of_cs(self, cs: Iterable[int]) -> float:
        cs = tuple(cs)
        partition_of(cs, self.n)
        return math.fsum(self.value(c) for c in cs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ValueTable):
            return NotImplemented
        return self.n == other.n and all(np.array_equal(a, b) for a, b in zip(self.lists, other.lists))

    def __repr__(self) -> str:
        return f"ValueTable(n={self.n}, distribution={self.distribution!r}, seed={self.seed})"


def generate(n: int, dist: DistributionSpec | str, seed: int | None = None) -> ValueTable:
    """Random benchmark instance.

    ``uniform``: v(C) = |C| * U(0, 1); ``normal``: v(C) = |C| * N(1, 0.1^2);
    ``ndcs``: v(C) ~ N(|C|, |C|).
    """
    if isinstance(dist, str):
        dist = DistributionSpec(dist, 0 if seed is None else seed)
    elif seed is not None:
        dist = DistributionSpec(dist.kind, seed)
    _check_n(n)
    rng = np.random.Generator(np.random.PCG64(dist.seed))
    lists = []
    for s in range(1, n + 1):
        size = binomial(n, s)
        if dist.kind == "uniform":
            v = s * rng.random(size)
        elif dist.kind == "normal":
            v = s * rng.normal(1.0, 0.1, size)
        else:
            v = rng.normal(float(s), math.sqrt(s), size)
        lists.append(v)
    return ValueTable(n, lists, distribution=dist.kind, seed=dist.seed)


def size_stats(table: ValueTable) -> list[SizeStats]:
    out = []
    for s, v in enumerate(table.lists, start=1):
        avg = math.fsum(v) / v.size
        out.append(SizeStats(s, float(v.max()), float(v.min()), avg))
    return out


# ---------------------------------------------------------------------------
# instance files


def dumps(table: ValueTable) -> bytes:
    tag = _TAGS.get(table.distribution, 0)
    head = _HEADER.pack(MAGIC, FORMAT_VERSION, table.n, tag, table.seed)
    body = b"".join(np.ascontiguousarray(v, dtype="<f8").tobytes() for v in table.lists)
    return head + body


def loads(data: bytes) -> ValueTable:
    if len(data) < _HEADER.size:
        raise InstanceFormatError("file is shorter than the header")
    magic, version, n, tag, seed = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise InstanceFormatError(f"bad magic bytes {magic!r}")
    if version != FORMAT_VERSION:
        raise InstanceFormatError(f"unsupported format version {version}")
    if not 1 <= n <= MAX_AGENTS:
        raise InstanceFormatError(f"agent count {n} out of range")
    if tag not in _TAG_NAMES:
        raise InstanceFormatError(f"unknown distribution tag {tag}")
    expected = (1 << n) - 1
    body = data[_HEADER.size:]
    if len(body) != 8 * expected:
        raise InstanceLengthError(f"expected {expected} values ({8 * expected} bytes), found {len(body)} bytes")
    flat = np.frombuffer(body, dtype="<f8").astype(np.float64)
    if not np.all(np.isfinite(flat)):
        raise NonFiniteValueError("instance contains NaN or infinite values")
    lists = []
    pos = 0
    for s in range(1, n + 1):
        size = binomial(n, s)
        lists.append(flat[pos:pos + size].copy())
        pos += size
    return ValueTable(n, lists, distribution=_TAG_NAMES[tag], seed=seed)


def save(table: ValueTable, path: str | os.PathLike) -> None:
    with open(path, "wb") as fh:
        fh.write(dumps(table))


def load(path: str | os.PathLike) -> ValueTable:
    with open(path, "rb") as fh:
        return loads(fh.read())


def to_csv(table: ValueTable) -> str:
    """Text form: a ``n,<agents>`` line, a ``size,index,value`` header, then one row per coalition."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", table.n])
    w.writerow(["size", "index", "value"])
    for s, v in enumerate(table.lists, start=1):
        for i, x in enumerate(v, start=1):
            w.writerow([s, i, repr(float(x))])
    return buf.getvalue()


def from_csv(text: str) -> ValueTable:
    rows = list(csv.reader(io.StringIO(text)))
    if len(rows) < 2 or rows[0][:1] != ["n"] or rows[1] != ["size", "index", "value"]:
        raise InstanceFormatError("missing 'n' line or 'size,index,value' header")
    try:
        n = int(rows[0][1])
    except (IndexError, ValueError):
        raise InstanceFormatError("agent count is not an integer") from None
    if not 1 <= n <= MAX_AGENTS:
        raise InstanceFormatError(f"agent count {n} out of range")
    lists = [np.full(binomial(n, s), np.nan) for s in range(1, n + 1)]
    body = rows[2:]
    if len(body) != (1 << n) - 1:
        raise InstanceLengthError(f"expected {(1 << n) - 1} rows, found {len(body)}")
    for row in body:
        try:
            s, i, x = int(row[0]), int(row[1]), float(row[2])
            lists[s - 1][i - 1] = x
        except (IndexError, ValueError):
            raise InstanceFormatError(f"malformed row {row!r}") from None
    for v in lists:
        if not np.all(np.isfinite(v)):
            raise NonFiniteValueError("missing or non-finite values")
    return ValueTable(n, lists)


# ---------------------------------------------------------------------------
# uniform sampling of coalition structures


def _randbelow(rng: np.random.Generator, bound: int) -> int:
    bits = bound.bit_length()
    nbytes = (bits + 7) // 8
    while True:
        r = int.from_bytes(rng.bytes(nbytes), "little") & ((1 << bits) - 1)
        if r < bound:
            return r


def sample_coalition_structures(n: int, k: int, rng: np.random.Generator) -> list[tuple[int, ...]]:
    """``k`` coalition structures drawn uniformly from all set partitions of ``n`` agents.

    A subspace is chosen with probability proportional to its exact size, then
    a random agent permutation is cut into blocks of the chosen sizes, which is
    uniform within the subspace.
    """
    partitions = enumerate_partitions(n)
    cum = []
    total = 0
    for G in partitions:
        total += subspace_size(G)
        cum.append(total)
    out = []
    for _ in range(k):
        r = _randbelow(rng, total)
        lo, hi = 0, len(cum) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if cum[mid] > r:
                hi = mid
            else:
                lo = mid + 1
        perm = rng.permutation(n)
        cs = []
        pos = 0
        for g in partitions[lo].parts:
            m = 0
            for a in perm[pos:pos + g]:
                m |= 1 << int(a)
            cs.append(m)
            pos += g
        out.append(tuple(cs))
    return out

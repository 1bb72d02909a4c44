import itertools
import math

import numpy as np
import pytest

from csgip import value_model as vm
from csgip.combinatorics import (
    bell_number,
    coalition,
    enumerate_partitions,
    grand_coalition,
    partition_of,
    popcount,
    subspace_size,
)
from csgip.value_model import (
    DistributionSpec,
    InstanceFormatError,
    InstanceLengthError,
    NonFiniteValueError,
    ValueTable,
    generate,
    size_stats,
)

from conftest import structures_by_partition


@pytest.mark.parametrize("kind", vm.DISTRIBUTIONS)
def test_generate_deterministic(kind):
    a = generate(3, kind, 11)
    b = generate(3, DistributionSpec(kind, 11))
    assert vm.dumps(a) == vm.dumps(b)
    assert vm.dumps(a) != vm.dumps(generate(3, kind, 12))


def test_generate_range_checks():
    with pytest.raises(ValueError):
        generate(0, "uniform")
    with pytest.raises(ValueError):
        generate(31, "uniform")
    with pytest.raises(ValueError):
        DistributionSpec("poisson")


def test_uniform_values_in_range():
    t = generate(10, "uniform", 3)
    for s, v in enumerate(t.lists, start=1):
        assert v.min() >= 0 and v.max() <= s


def test_normal_per_size_means():
    t = generate(14, "normal", 5)
    for s in range(2, 13):
        v = t.list_for(s)
        if v.size < 10_000:
            continue
        se = s * 0.1 / math.sqrt(v.size)
        assert abs(v.mean() - s) < 5 * se


def test_ndcs_per_size_moments():
    t = generate(15, "ndcs", 2)
    v = t.list_for(7)
    assert abs(v.mean() - 7) < 5 * math.sqrt(7 / v.size)
    assert abs(v.var() - 7) < 5 * math.sqrt(2 * 49 / v.size)


def test_value_lookup_and_write():
    t = generate(6, "uniform", 1)
    assert t.value(coalition(1, 2, 3)) == t.list_for(3)[0]
    assert t.value(grand_coalition(6)) == t.list_for(6)[0]
    t.set_value(coalition(2, 5), 7.5)
    assert t.value(coalition(2, 5)) == 7.5
    assert t.by_mask[coalition(2, 5)] == 7.5
    with pytest.raises(ValueError):
        t.value(0)


def test_by_mask_agrees_with_lookup():
    t = generate(7, "ndcs", 4)
    for m in range(1, 1 << 7):
        assert t.by_mask[m] == t.value(m)


def test_value_of_cs():
    t = generate(5, "normal", 9)
    singles = [1 << i for i in range(5)]
    assert t.value_of_cs(singles) == pytest.approx(sum(t.value(c) for c in singles))
    assert t.value_of_cs([grand_coalition(5)]) == t.value(grand_coalition(5))
    with pytest.raises(ValueError):
        t.value_of_cs([coalition(1, 2), coalition(2, 3, 4, 5)])


def test_value_of_cs_against_summation():
    structures = structures_by_partition(4)[(1, 1, 2)]
    for seed in range(100):
        t = generate(4, "uniform", seed)
        for cs in structures:
            direct = 0.0
            for c in cs:
                s = popcount(c)
                lst = [sum(1 << (a - 1) for a in c) for c in itertools.combinations(range(1, 5), s)]
                direct += t.list_for(s)[lst.index(c)]
            assert t.value_of_cs(cs) == pytest.approx(direct, rel=1e-12)


def test_size_stats():
    const = ValueTable.from_function(5, lambda m: 2.5)
    for st in size_stats(const):
        assert st.max_s == st.min_s == st.avg_s == 2.5
    t = generate(8, "uniform", 7)
    for st in size_stats(t):
        v = [float(x) for x in t.list_for(st.s)]
        assert st.max_s == max(v) and st.min_s == min(v)
        assert abs(st.avg_s - sum(v) / len(v)) <= 1e-12
        assert st.min_s <= st.avg_s <= st.max_s


def test_binary_roundtrip(tmp_path):
    t = generate(9, "ndcs", 123456789)
    path = tmp_path / "x.csgv"
    vm.save(t, path)
    u = vm.load(path)
    assert u == t and u.distribution == "ndcs" and u.seed == 123456789
    raw = path.read_bytes()
    assert raw[:4] == b"CSGV" and len(raw) == vm._HEADER.size + 8 * 511


def test_binary_errors():
    data = vm.dumps(generate(4, "uniform", 0))
    with pytest.raises(InstanceLengthError):
        vm.loads(data[:-3])
    with pytest.raises(InstanceFormatError):
        vm.loads(b"XXXX" + data[4:])
    with pytest.raises(InstanceFormatError):
        vm.loads(data[:5])
    bad = bytearray(data)
    bad[-8:] = np.array([np.nan]).tobytes()
    with pytest.raises(NonFiniteValueError):
        vm.loads(bytes(bad))


def test_csv_roundtrip_and_errors():
    t = generate(5, "normal", 3)
    text = vm.to_csv(t)
    assert text.splitlines()[:2] == ["n,5", "size,index,value"]
    assert vm.from_csv(text) == t
    with pytest.raises(InstanceLengthError):
        vm.from_csv("\n".join(text.splitlines()[:-1]))
    with pytest.raises(InstanceFormatError):
        vm.from_csv("size,index,value\n")
    with pytest.raises(NonFiniteValueError):
        vm.from_csv(text.replace(text.splitlines()[-1], "5,1,inf"))


def test_sampler_is_uniform_over_structures():
    rng = np.random.Generator(np.random.PCG64(0))
    n = 4
    samples = vm.sample_coalition_structures(n, 15_000, rng)
    counts = {}
    for cs in samples:
        key = frozenset(cs)
        counts[key] = counts.get(key, 0) + 1
    assert len(counts) == 15  # Bell(4)
    expected = 15_000 / 15
    chi2 = sum((c - expected) ** 2 / expected for c in counts.values())
    assert chi2 < 36.1  # 0.999 quantile of chi-square with 14 dof


def test_sampler_partition_frequencies_follow_sizes():
    rng = np.random.Generator(np.random.PCG64(1))
    samples = vm.sample_coalition_structures(6, 20_000, rng)
    freq = {}
    for cs in samples:
        G = partition_of(cs, 6)
        freq[G] = freq.get(G, 0) + 1
    for G in enumerate_partitions(6):
        p = subspace_size(G) / bell_number(6)
        assert abs(freq.get(G, 0) / 20_000 - p) < 5 * math.sqrt(p * (1 - p) / 20_000)

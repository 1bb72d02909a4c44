import math
from collections import defaultdict

import pytest

ACCEPTANCE_LINES = []


def set_partitions(agents):
    """Independent oracle: all set partitions of ``agents`` as lists of frozensets."""
    agents = list(agents)
    if not agents:
        yield []
        return
    first, rest = agents[0], agents[1:]
    for part in set_partitions(rest):
        yield [frozenset([first])] + part
        for i in range(len(part)):
            yield part[:i] + [part[i] | {first}] + part[i + 1:]


def to_masks(part):
    return tuple(sum(1 << (a - 1) for a in block) for block in part)


def structures_by_partition(n):
    out = defaultdict(list)
    for part in set_partitions(range(1, n + 1)):
        out[tuple(sorted(len(b) for b in part))].append(to_masks(part))
    return out


def brute_value(table, cs):
    return math.fsum(table.by_mask[c] for c in cs)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def report():
    def _report(criterion, ok, detail):
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}")
        return ok
    return _report

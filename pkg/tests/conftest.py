import numpy as np
import pytest

from treegroom.topology import complete_binary, star
from treegroom.traffic import TrafficInstance, demand_index


def make_instance(n, entries, g=16, M=1):
    """Instance with the given ``{(i, j): amount or [per-pattern amounts]}``, zero elsewhere."""
    pats = np.zeros((M, n, n), dtype=np.int64)
    for (i, j), amt in entries.items():
        pats[:, i, j] = amt
    return TrafficInstance(n, M, g, pats)


def order_of(n, pairs):
    """Chromosome listing ``pairs`` first, then every other demand in index order."""
    idx = demand_index(n)
    head = [idx.index(i, j) for i, j in pairs]
    return head + [k for k in range(len(idx)) if k not in head]


@pytest.fixture
def all_tens():
    pats = np.full((1, 3, 3), 10)
    np.fill_diagonal(pats[0], 0)
    return TrafficInstance(3, 1, 16, pats), star(3)


@pytest.fixture
def star3():
    return star(3)


@pytest.fixture
def star4():
    return star(4)


@pytest.fixture
def tree7():
    return complete_binary(7)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

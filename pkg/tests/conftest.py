import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from drw_pubsub.topology import from_edges  # noqa: E402

CRITERIA: list[tuple[str, bool, str]] = []


@pytest.fixture
def report():
    """Record one acceptance line: report(name, passed, detail)."""

    def _add(name, passed, detail=""):
        CRITERIA.append((name, bool(passed), detail))
        return passed

    return _add


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in CRITERIA:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")


def path_graph(n):
    return from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n):
    return from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def star_graph(leaves):
    return from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def grid_graph(w, h):
    edges = []
    for y in range(h):
        for x in range(w):
            a = y * w + x
            if x + 1 < w:
                edges.append((a, a + 1))
            if y + 1 < h:
                edges.append((a, a + w))
    return from_edges(w * h, edges)


@pytest.fixture
def triangle():
    return from_edges(3, [(0, 1), (1, 2), (2, 0)])

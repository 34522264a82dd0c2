import numpy as np
import pytest

from graphpde.graph import parse_graph

_RESULTS = pytest.StashKey[list]()

P3_DOC = '{"edges": [["a", "b"], ["b", "c"]], "interior": ["b"]}'
P4_DOC = '{"edges": [["0", "1"], ["1", "2"], ["2", "3"]], "interior": ["1", "2"]}'


@pytest.fixture
def p3():
    return parse_graph(P3_DOC)


@pytest.fixture
def p4():
    return parse_graph(P4_DOC)


@pytest.fixture
def rng():
    return np.random.default_rng(20111)


@pytest.fixture
def criterion(request):
    """Record one acceptance line; printed in the terminal summary."""
    results = request.config.stash.setdefault(_RESULTS, [])

    def record(number, name, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {name}"
        if detail:
            line += f" ({detail})"
        results.append((number, line))
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_RESULTS, [])
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(results, key=lambda r: r[0]):
        terminalreporter.write_line(line)

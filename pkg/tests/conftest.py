import pytest
from hypothesis import strategies as st

from hypergt.hypergraph import Hypergraph

_criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    key = marker.args
    if report.when == "call" or (report.when == "setup" and report.failed):
        _criteria[key] = _criteria.get(key, True) and report.passed


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for (number, name), passed in sorted(_criteria.items()):
        terminalreporter.write_line(f"criterion {number} {name}: {'PASS' if passed else 'FAIL'}")


@st.composite
def hypergraphs(draw, max_n=7, max_edges=6, min_edges=2, max_d=4):
    """Valid hypergraphs: distinct non-empty edges over [n]."""
    n = draw(st.integers(min_value=2, max_value=max_n))
    d = draw(st.integers(min_value=1, max_value=min(max_d, n)))
    edge = st.frozensets(st.integers(min_value=1, max_value=n), min_size=1, max_size=d)
    edges = draw(st.lists(edge, min_size=min_edges, max_size=max_edges, unique=True))
    return Hypergraph(n, tuple(tuple(sorted(e)) for e in edges))

import math

import pytest

from embedsolve.graphs import complete_graph, truncated_icosahedron
from embedsolve.spectral_core import build_graph_embedding


@pytest.fixture(scope="session")
def c60():
    return truncated_icosahedron()


@pytest.fixture(scope="session")
def c60_T(c60):
    return build_graph_embedding(c60)


@pytest.fixture(scope="session")
def c60_sigma():
    return math.sqrt(9 / 380)


@pytest.fixture(scope="session")
def k10_T():
    return build_graph_embedding(complete_graph(10))


_ACCEPTANCE = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    if rep.when == "setup":
        item.user_properties.append(("setup_s", rep.duration))
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        setup = dict(item.user_properties).get("setup_s", 0.0) if rep.when == "call" else 0.0
        _ACCEPTANCE[mark.kwargs["id"]] = (mark.kwargs["title"], rep.passed, rep.duration + setup)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_ACCEPTANCE):
        title, ok, dur = _ACCEPTANCE[cid]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {cid:>2}  {title}  ({dur:.2f} s)")

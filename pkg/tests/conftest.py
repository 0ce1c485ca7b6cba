"""Shared fixtures and the acceptance summary printed at the end of a run."""
import numpy as np
import pytest

from axistokes.domain import builtin_domain
from axistokes.mesh import GradingPlan, build_hierarchy

_ACCEPTANCE = {}


@pytest.fixture(scope="session")
def unit_square():
    return builtin_domain("unit_square")


@pytest.fixture(scope="session")
def square_hierarchy(unit_square):
    """Uniform refinements of the coarse unit-square triangulation, levels 0-4."""
    return build_hierarchy(unit_square, GradingPlan.uniform(unit_square, 0.5, 1), 4,
                           enforce_edge_bound=False)


@pytest.fixture(scope="session")
def omega1_hierarchy():
    dom = builtin_domain("omega1")
    return build_hierarchy(dom, GradingPlan.single(dom.marked_vertex, 0.2, 1), 3,
                           enforce_edge_bound=False)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    name = report.nodeid.rsplit("::", 1)[-1]
    if "test_acceptance.py" in report.nodeid and name.startswith("test_criterion_"):
        num = int(name.split("_")[2])
        label = name.split("_", 3)[3].replace("_", " ") if name.count("_") >= 3 else ""
        _ACCEPTANCE[num] = (report.outcome, label)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_ACCEPTANCE):
        outcome, label = _ACCEPTANCE[num]
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {num}: {verdict}  ({label})")

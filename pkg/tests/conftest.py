import numpy as np
import pytest

from parsimplex import LpProblem

_acceptance: dict[str, str] = {}


@pytest.fixture
def textbook():
    """max 3x1 + 5x2  s.t.  x1 <= 4, 2x2 <= 12, 3x1 + 2x2 <= 18."""
    return LpProblem(np.array([[1.0, 0.0], [0.0, 2.0], [3.0, 2.0]]),
                     np.array([4.0, 12.0, 18.0]), np.array([3.0, 5.0]))


@pytest.fixture
def unbounded():
    """max x1  s.t.  -x1 + x2 <= 1."""
    return LpProblem(np.array([[-1.0, 1.0]]), np.array([1.0]), np.array([1.0, 0.0]))


@pytest.fixture
def beale():
    """Beale's example: cycles under the Dantzig rule with index tie-breaks."""
    return LpProblem(
        np.array([[0.25, -60.0, -0.04, 9.0], [0.5, -90.0, -0.02, 3.0], [0.0, 0.0, 1.0, 0.0]]),
        np.array([0.0, 0.0, 1.0]),
        np.array([0.75, -150.0, 0.02, -6.0]),
    )


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        outcome = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        _acceptance[name] = outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in sorted(_acceptance.items()):
        terminalreporter.write_line(f"{outcome}  {name}")

import numpy as np
import pytest

from msqw.ising import IsingProblem


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def worked():
    """n=2, h=(1, -0.5), J[1][0]=2."""
    return IsingProblem([1.0, -0.5], [[0.0, 0.0], [2.0, 0.0]], label="worked")


_CRITERIA: list[str] = []


@pytest.fixture
def criterion():
    """Record a one-line PASS/FAIL verdict for the acceptance summary."""
    def record(number: int, name: str, ok: bool, detail: str) -> bool:
        _CRITERIA.append(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {name}: {detail}")
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_CRITERIA):
            terminalreporter.write_line(line)

import numpy as np
import pytest

from sar.instance import RegressionInstance, random_system, vectorize


@pytest.fixture
def tiny_instance():
    """Fixed 2x2 instance whose losses were computed with 40-digit arithmetic."""
    A1 = np.array([[1.0, 0.5], [-0.3, 0.8]])
    A2 = np.array([[0.2, -0.4], [0.7, 0.1]])
    B = np.array([[0.3, 0.4], [0.6, -0.2]])
    return RegressionInstance(A1, A2, B, R=4.5)


@pytest.fixture
def tiny_x():
    return np.array([0.5, -1.0, 0.25, 0.75])


@pytest.fixture
def tiny_sys(tiny_instance):
    return vectorize(tiny_instance)


@pytest.fixture
def sys_3_2():
    return random_system(3, 2, 4.5, seed=9)


#: (criterion, passed, detail) lines filled in by test_acceptance.py
ACCEPTANCE = []


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit, ok, detail in sorted(ACCEPTANCE, key=lambda t: t[0]):
        terminalreporter.write_line(f"criterion {crit}: {'PASS' if ok else 'FAIL'}  {detail}")

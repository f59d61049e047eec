import numpy as np
import pytest

from chlorostat.kinetics import default_kinetics
from chlorostat.presets import preset

# acceptance results, printed in the terminal summary
ACCEPTANCE = {}


def record(criterion, ok, detail=""):
    ACCEPTANCE[criterion] = (bool(ok), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def fig1():
    return preset("fig1")


@pytest.fixture
def fig2():
    return preset("fig2")


@pytest.fixture
def kin(fig1):
    return default_kinetics(fig1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

import numpy as np
import pytest

from emtrack.config import PipelineConfig
from emtrack.fieldmodel import SensorSpec, default_array
from emtrack.solver import default_bounds


@pytest.fixture(scope="session")
def array():
    return default_array()


@pytest.fixture(scope="session")
def sensor():
    return SensorSpec()


@pytest.fixture(scope="session")
def bounds():
    return default_bounds()


@pytest.fixture(scope="session")
def cfg():
    return PipelineConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    from acceptance_report import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        passed, title, detail = RESULTS[number]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  criterion {number}: {title} ({detail})")

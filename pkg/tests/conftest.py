import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from rwdro import instances

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def shipped():
    return instances.shipped()


@pytest.fixture(scope="session")
def shipped_pi0(shipped):
    return instances.shipped_reference(shipped)


@pytest.fixture
def two_point():
    return instances.two_point()

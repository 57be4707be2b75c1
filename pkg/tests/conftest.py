import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from holofisher import fixtures

settings.register_profile(
    "default", deadline=None, max_examples=25, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def synthetic():
    return fixtures.load("synthetic")


@pytest.fixture(scope="session")
def vectorcardiogram():
    return fixtures.load("vectorcardiogram")


@pytest.fixture(scope="session")
def heel():
    return fixtures.load("heel")


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for block in test_acceptance.RESULTS:
            terminalreporter.write_line(block)

import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from goodwin.model import PRESET, GoodwinModel

settings.register_profile("goodwin", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("goodwin")

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def model():
    return GoodwinModel.from_params(PRESET)


@pytest.fixture(scope="session")
def model0():
    return GoodwinModel.from_params(PRESET.replace(sigma0=0.0))


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

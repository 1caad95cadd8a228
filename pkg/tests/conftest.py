import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from irsce.config import make_config

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_cfg():
    return make_config("small")


@pytest.fixture
def tiny_cfg():
    # 2x2 arrays, 4 subcarriers: cheap enough for dense oracles
    return make_config("small", M_dims=(2, 2), N_dims=(2, 2), K=4, N_CP=4, L_nlos=2)


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import RESULTS
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)

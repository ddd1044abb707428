import numpy as np
import pytest

from virtualeve import SystemParams, TrialConfig, build_scenario, default_array, draw_paths


@pytest.fixture
def params():
    return SystemParams()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def paths(params, rng):
    return draw_paths(params.num_paths, rng)


@pytest.fixture
def array(params):
    return default_array(params)


@pytest.fixture
def scenario(params):
    return build_scenario(params, TrialConfig(num_trials=1000, seed=3), 4, 4)


ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: s.split("criterion ")[1]):
            terminalreporter.write_line(line)

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fracnehari.grid import GridSpec
from fracnehari.nonlinearity import make_builtin

settings.register_profile(
    "default", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.function_scoped_fixture]
)
settings.load_profile("default")

# pass/fail lines collected by the acceptance suite, echoed at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def soliton_values(x):
    return 2.0 / (1.0 + x * x)


@pytest.fixture(scope="session")
def periodic_grid():
    return GridSpec(80.0, 4096, "periodic")


@pytest.fixture(scope="session")
def free_grid():
    return GridSpec(80.0, 4096, "free")


@pytest.fixture(scope="session")
def small_grid():
    return GridSpec(40.0, 512, "periodic")


@pytest.fixture(scope="session")
def quadratic():
    return make_builtin("pure_power", p=2)


@pytest.fixture(scope="session")
def critical40():
    return make_builtin("paper_critical", lam=40, q=4, alpha0=np.pi / 4)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def smooth_random(grid, rng, n_modes=6, width=4.0):
    """Random smooth, rapidly decaying field."""
    x = grid.x
    c = rng.standard_normal(n_modes)
    shift = rng.uniform(-2, 2)
    poly = sum(ck * np.cos((k + 1) * 0.7 * (x - shift) + k) for k, ck in enumerate(c))
    return grid.field(lambda _: poly * np.exp(-0.5 * ((x - shift) / width) ** 2))

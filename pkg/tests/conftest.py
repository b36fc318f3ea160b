import numpy as np
import pytest
from hypothesis import settings

from wignerlab import phase_space as ps
from wignerlab.initial_data import ClassicalProfile
from wignerlab.potential import gaussian_potential

settings.register_profile("default", max_examples=25, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def grid():
    return ps.make_grid(1, 128, 128, 8.0, 8.0)


@pytest.fixture(scope="session")
def fine_grid():
    return ps.make_grid(1, 256, 256, 8.0, 8.0)


@pytest.fixture(scope="session")
def phi():
    return gaussian_potential(1.0, 1.0)


@pytest.fixture(scope="session")
def profile():
    return ClassicalProfile(M0=6.0, sigma_x=1.5, sigma_k=1.0, x_cut=6.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def gaussian_field(grid, x0=0.0, k0=0.0, s=1.0, eps=0.0):
    return ps.from_function(
        grid, lambda x, k: np.exp(-((x - x0) ** 2 + (k - k0) ** 2) / (2 * s * s)) / (2 * np.pi * s * s),
        eps)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

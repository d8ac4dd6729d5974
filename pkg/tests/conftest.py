import numpy as np
import pytest

from etgsim import Grid, Profile, make_coefficient, sample_coefficient

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def grid51():
    return Grid(51)


@pytest.fixture(scope="session")
def bump_coeff():
    return make_coefficient("paper-example")


@pytest.fixture(scope="session")
def bump_b0(grid51, bump_coeff):
    return sample_coefficient(bump_coeff, 0.0, grid51)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)


def smooth_profile(grid: Grid, rng, modes: int = 4) -> Profile:
    """Random low-mode sine combination; smooth and zero at both ends."""
    x = grid.nodes
    coeffs = rng.standard_normal(modes)
    vals = sum(c * np.sin((k + 1) * np.pi * x) for k, c in enumerate(coeffs))
    return Profile(grid, vals)

"""Shared fixtures: the two standard damped-oscillator benchmark setups."""

import pytest

import damped_midpoint as dm


@pytest.fixture(scope="session")
def sys_1d():
    """Scalar oscillator q̈ + 0.05 q̇ + 2 q = 0."""
    return dm.make_system([[2.0]], [[0.05]], label="paper_1d")


@pytest.fixture(scope="session")
def z0_1d():
    return dm.PhaseState(0.0, [0.1], [0.2])


@pytest.fixture(scope="session")
def sys_2d():
    """Coupled-damping pair with K = 3·I and symmetric PSD damping."""
    return dm.make_system(
        [[3.0, 0.0], [0.0, 3.0]],
        [[0.03, -0.01], [-0.01, 0.01]],
        label="paper_2d",
    )


@pytest.fixture(scope="session")
def z0_2d():
    return dm.PhaseState(0.0, [0.1, 0.2], [0.1, 0.2])

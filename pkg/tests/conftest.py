import pytest

from segccm.catalogue import catalogue_system
from segccm.dynsys import observe, simulate


@pytest.fixture(scope="session")
def lorenz_spec():
    return catalogue_system("lorenz63")


@pytest.fixture(scope="session")
def lorenz_traj(lorenz_spec):
    return simulate(lorenz_spec)


@pytest.fixture(scope="session")
def lorenz_x(lorenz_traj):
    return observe(lorenz_traj, "x")


@pytest.fixture(scope="session")
def lorenz_z(lorenz_traj):
    return observe(lorenz_traj, "z")


@pytest.fixture(scope="session")
def ramp_traj():
    return simulate(catalogue_system("ramp_sine"))

import numpy as np
import pytest

from mcf_arrival import acceptance
from mcf_arrival.analysis import find_critical_points
from mcf_arrival.pipeline import select_apex


@pytest.fixture(scope="session")
def circle_run():
    return acceptance.simulate("circle", 256)


@pytest.fixture(scope="session")
def sphere_run():
    return acceptance.simulate("sphere", 256)


@pytest.fixture(scope="session")
def torus_run():
    return acceptance.simulate("torus", 256)


@pytest.fixture(scope="session")
def dumbbell_run():
    return acceptance.simulate("dumbbell", 256)


@pytest.fixture(scope="session")
def torus_points(torus_run):
    return find_critical_points(torus_run.u)


@pytest.fixture(scope="session")
def ring_point(torus_points):
    return select_apex(torus_points)


@pytest.fixture(scope="session")
def dumbbell_points(dumbbell_run):
    return find_critical_points(dumbbell_run.u)


@pytest.fixture(scope="session")
def neck_point(dumbbell_points):
    return select_apex(dumbbell_points)


@pytest.fixture(scope="session")
def oracles():
    return acceptance.oracle_fields(128)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)

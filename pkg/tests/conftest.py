import pytest

from evysc.config import default_bundle


@pytest.fixture(scope="session")
def bundle():
    return default_bundle()


@pytest.fixture(scope="session")
def veh(bundle):
    return bundle.vehicle


@pytest.fixture(scope="session")
def pacejka(bundle):
    return bundle.pacejka


@pytest.fixture(scope="session")
def powertrain(bundle):
    return bundle.powertrain


@pytest.fixture(scope="session")
def ctrl(bundle):
    return bundle.controller

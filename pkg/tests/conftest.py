import numpy as np
import pytest

from qbeam import testing


@pytest.fixture(scope="session")
def equal_net():
    return testing.equal_network()


@pytest.fixture(scope="session")
def unequal_net():
    return testing.unequal_network()


@pytest.fixture
def rng():
    return np.random.default_rng(42)

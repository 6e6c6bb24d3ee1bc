import numpy as np
import pytest

from walshreg.bench import synthetic_image


@pytest.fixture(scope="session")
def image256():
    return synthetic_image(256, seed=0)


@pytest.fixture(scope="session")
def image64():
    return synthetic_image(64, seed=1)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)

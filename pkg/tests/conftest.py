import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from surfwave.spectral import SpectralGrid

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def grid64():
    return SpectralGrid(64)

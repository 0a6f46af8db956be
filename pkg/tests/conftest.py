import numpy as np
import pytest

from powergame import ChannelMatrix, EfficiencyModel, SystemConfig

# Frozen with an arbitrary-precision bisection oracle (mpmath, 40 digits)
# on e^g = 1 + 100 g over [1e-6, 100].
GAMMA_STAR_100 = 6.474600379589358


@pytest.fixture(scope="session")
def model():
    return EfficiencyModel(100)


@pytest.fixture
def rng():
    return np.random.default_rng(20260824)


def random_instance(rng, K, D, N=128, gain_scale=1.0):
    """A random system with Exp(1)-distributed gains, like the fading model."""
    config = SystemConfig(K=K, D=D, N=N)
    gains = rng.exponential(gain_scale, size=(K, D))
    gains = np.maximum(gains, 1e-12)
    return config, ChannelMatrix(gains)

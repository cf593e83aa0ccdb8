import numpy as np
import pytest

from llnlab.rng import make_rng_stream


@pytest.fixture
def rng():
    return make_rng_stream(1234, 0)


@pytest.fixture
def uniform_omegas():
    """A fixed batch of uniforms for Monte Carlo consistency oracles."""
    return make_rng_stream(99, 17).uniforms(100_000)


def three_sigma_interval(values: np.ndarray) -> tuple[float, float, float]:
    """(mean, low, high) with a three-standard-error band."""
    mean = float(values.mean())
    se = float(values.std(ddof=1) / np.sqrt(len(values)))
    return mean, mean - 3 * se, mean + 3 * se

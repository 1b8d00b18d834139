import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def draw_spectral(rng, accept=None, tries=200):
    """Sample x + iy, x ~ U(0,1), y ~ U(0.1,0.5), off the pole lattice."""
    for _ in range(tries):
        z = complex(rng.uniform(0, 1), rng.uniform(0.1, 0.5))
        if accept is None or accept(z):
            return z
    raise RuntimeError("sampling failed")

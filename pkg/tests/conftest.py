import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def grid_mixture_weight(loss, gamma, eta, step=1e-4):
    """Brute-force argmin over v in [0, 1] of v*loss + gamma^2 / (v + gamma/eta)."""
    v = np.linspace(0.0, 1.0, int(round(1.0 / step)) + 1)
    return float(v[np.argmin(v * loss + gamma**2 / (v + gamma / eta))])

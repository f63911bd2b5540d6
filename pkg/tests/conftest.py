import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_gray(rng, h, w, lo=0, hi=256):
    return rng.integers(lo, hi, size=(h, w)).astype(np.uint8)


def peaked_gray(rng, h, w):
    """Image with a peaked histogram (clipped normal), the realistic case."""
    mu = rng.uniform(60, 200)
    sigma = rng.uniform(8, 40)
    return np.clip(np.round(rng.normal(mu, sigma, size=(h, w))), 0, 255).astype(np.uint8)

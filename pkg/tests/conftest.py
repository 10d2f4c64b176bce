import numpy as np
import pytest

from orbitmin.loops import FourierLoop


def make_circle(radius=1.0, dim=2, max_mode=8):
    """Circle of given radius in the (e1, e2) plane, one traversal per period."""
    cos = np.zeros((max_mode, dim))
    sin = np.zeros((max_mode, dim))
    cos[0, 0] = radius
    sin[0, 1] = radius
    return FourierLoop(
        dim=dim, max_mode=max_mode, mean=np.zeros(dim), cos_coeffs=cos, sin_coeffs=sin
    )


def make_random_loop(rng, dim=2, max_mode=8, scale=1.0, decay=1.5, with_mean=True):
    """Random smooth loop with mode amplitudes decaying like k^-decay."""
    k = np.arange(1, max_mode + 1, dtype=float)
    weights = (k**-decay)[:, None]
    mean = scale * rng.normal(size=dim) if with_mean else np.zeros(dim)
    return FourierLoop(
        dim=dim,
        max_mode=max_mode,
        mean=mean,
        cos_coeffs=scale * weights * rng.normal(size=(max_mode, dim)),
        sin_coeffs=scale * weights * rng.normal(size=(max_mode, dim)),
    )


@pytest.fixture
def circle():
    return make_circle()


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)

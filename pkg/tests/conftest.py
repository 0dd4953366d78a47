"""Shared fixtures: seeded RNGs and small reference images."""

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def ramp_image():
    """8x8 image with pixel(r, c) = 8r + c, handy for index arithmetic."""
    return (np.arange(64, dtype=np.float64).reshape(8, 8)).copy()


@pytest.fixture
def motif_benchmark():
    from groupcs import make_motif_image

    return make_motif_image(64, 3)

"""Synthetic benchmark images with strong nonlocal self-similarity."""

from __future__ import annotations

import numpy as np

MOTIF_SIDE = 6


def make_motif_image(size=64, seed=0):
    """A size x size image tiled from one random 6x6 motif.

    The tiling is modulated by a smooth rank-one brightness field so
    matched patch groups are very low rank without being exact copies.
    Values lie in [0, 255].
    """
    rng = np.random.default_rng(seed)
    motif = rng.integers(30, 226, (MOTIF_SIDE, MOTIF_SIDE)).astype(float)
    reps = -(-size // MOTIF_SIDE)
    tiled = np.tile(motif, (reps, reps))[:size, :size]
    t = np.linspace(0.0, np.pi, size)
    gain = 0.85 + 0.15 * np.sin(t)
    return np.clip(tiled * np.outer(gain, gain), 0.0, 255.0)

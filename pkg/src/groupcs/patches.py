"""Patch extraction, block matching, and group assembly.

Images are 2-D float64 numpy arrays indexed [row, col].  A patch of side s
anchored at (r, c) covers rows r..r+s-1 and columns c..c+s-1 and is
vectorized in column-major order within the patch.  A group collects the
group_size most similar patches to a reference patch (squared Euclidean
distance, search window clipped at the borders) as the columns of a
patch_side**2 x group_size matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GroupingConfig:
    """Block-matching parameters.

    patch_side : side length of the square patches.
    stride : spacing of the reference-patch lattice.
    window_side : side of the square search window centered on the
        reference anchor.
    group_size : number of patches per group (columns of the group matrix).
    """

    patch_side: int = 6
    stride: int = 4
    window_side: int = 20
    group_size: int = 60

    def __post_init__(self):
        if self.patch_side < 1:
            raise ValueError("patch_side must be >= 1")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")
        if self.window_side < 1:
            raise ValueError("window_side must be >= 1")
        if self.group_size < 1:
            raise ValueError("group_size must be >= 1")


@dataclass
class PatchGroup:
    """A matched patch group.

    matrix : (patch_side**2, group_size) array, one vectorized patch per
        column, ordered by increasing distance to the reference patch.
    positions : (group_size, 2) int array of patch anchors, same order.
    ref_index : column holding the reference patch content; 0 by
        construction, since the reference matches itself at distance zero
        and ties are broken by raster order (under exact ties the recorded
        anchor may differ from the reference anchor, but the column values
        are identical).
    patch_side : side length of the patches.
    """

    matrix: np.ndarray
    positions: np.ndarray
    ref_index: int
    patch_side: int


def extract_patch(image, pos, patch_side):
    """Return the vectorized patch of the given side anchored at pos.

    The patch must lie fully inside the image.  Vectorization is
    column-major within the patch: all rows of the first patch column,
    then the next column, and so on.
    """
    img = np.asarray(image, dtype=float)
    r, c = pos
    s = patch_side
    if r < 0 or c < 0 or r + s > img.shape[0] or c + s > img.shape[1]:
        raise ValueError(f"patch at {pos} with side {s} exceeds image {img.shape}")
    return img[r : r + s, c : c + s].ravel(order="F")


def _check_image(image, cfg):
    img = np.asarray(image, dtype=float)
    if img.ndim != 2:
        raise ValueError("image must be 2-D")
    if img.shape[0] < cfg.patch_side or img.shape[1] < cfg.patch_side:
        raise ValueError(
            f"image {img.shape} smaller than patch side {cfg.patch_side}"
        )
    return img


def _all_patch_vectors(img, s):
    # (H-s+1, W-s+1, s*s) array: vectorized patch at every valid anchor.
    win = np.lib.stride_tricks.sliding_window_view(img, (s, s))
    return np.ascontiguousarray(win.transpose(0, 1, 3, 2)).reshape(
        win.shape[0], win.shape[1], s * s
    )


def _window_bounds(ref, window_side, last):
    lo = ref - window_side // 2
    hi = lo + window_side - 1
    return max(0, lo), min(last, hi)


def _match_from_index(vecs, ref_pos, cfg):
    s = cfg.patch_side
    last_r = vecs.shape[0] - 1
    last_c = vecs.shape[1] - 1
    rr, cc = ref_pos
    if not (0 <= rr <= last_r and 0 <= cc <= last_c):
        raise ValueError(f"reference anchor {ref_pos} out of range")
    r0, r1 = _window_bounds(rr, cfg.window_side, last_r)
    c0, c1 = _window_bounds(cc, cfg.window_side, last_c)
    cand = vecs[r0 : r1 + 1, c0 : c1 + 1]
    n_cand = cand.shape[0] * cand.shape[1]
    if n_cand < cfg.group_size:
        raise ValueError(
            f"window at {ref_pos} holds {n_cand} candidates, "
            f"need group_size={cfg.group_size}"
        )
    ref_vec = vecs[rr, cc]
    diff = cand.reshape(n_cand, s * s) - ref_vec
    dist = np.einsum("ij,ij->i", diff, diff)
    # Candidates are enumerated in raster order, so a stable sort breaks
    # distance ties toward lower row, then lower column.
    order = np.argsort(dist, kind="stable")[: cfg.group_size]
    rows = r0 + order // cand.shape[1]
    cols = c0 + order % cand.shape[1]
    matrix = cand.reshape(n_cand, s * s)[order].T.copy()
    positions = np.stack([rows, cols], axis=1)
    return PatchGroup(matrix=matrix, positions=positions, ref_index=0, patch_side=s)


def match_group(image, ref_pos, cfg):
    """Match the group_size nearest patches to the reference at ref_pos.

    Distances are squared Euclidean between vectorized patches.  The
    search window of side cfg.window_side is centered on the reference
    anchor and clipped at the image borders; every candidate anchor must
    admit a full patch.  Raises ValueError if the clipped window holds
    fewer than group_size candidates.
    """
    img = _check_image(image, cfg)
    vecs = _all_patch_vectors(img, cfg.patch_side)
    return _match_from_index(vecs, ref_pos, cfg)


def _anchor_axis(dim, patch_side, stride):
    last = dim - patch_side
    # Consecutive anchors may be at most patch_side apart or pixels between
    # reference patches would go uncovered, so the effective step is capped.
    step = min(stride, patch_side)
    xs = list(range(0, last + 1, step))
    if xs[-1] != last:
        xs.append(last)
    return xs


def reference_anchors(shape, cfg):
    """Reference lattice: multiples of the stride plus edge-snapped anchors."""
    rows = _anchor_axis(shape[0], cfg.patch_side, cfg.stride)
    cols = _anchor_axis(shape[1], cfg.patch_side, cfg.stride)
    return [(r, c) for r in rows for c in cols]


def build_groups(image, cfg):
    """Build one matched group per reference-lattice anchor.

    Returns the groups in raster order of their reference anchors.  The
    lattice covers every pixel with at least one reference patch.
    """
    img = _check_image(image, cfg)
    vecs = _all_patch_vectors(img, cfg.patch_side)
    return [
        _match_from_index(vecs, pos, cfg) for pos in reference_anchors(img.shape, cfg)
    ]


def aggregate_groups(groups, shape):
    """Average all patch contributions back into an image of the given shape.

    Each output pixel is the mean of every patch pixel that lands on it.
    The mean is computed as a first-pass mean plus an averaged correction
    of the residuals, which keeps the round trip through
    build_groups/aggregate_groups bitwise exact.  A pixel no patch covers
    is an internal consistency error.
    """
    h, w = shape
    n = h * w
    if not groups:
        raise ValueError("no groups to aggregate")
    s = groups[0].patch_side
    # Flat image index of every patch entry, enumerated to match the
    # column-major patch vectorization.
    offs = (np.arange(s)[:, None] * w + np.arange(s)[None, :]).ravel(order="F")
    idx_parts = []
    val_parts = []
    for g in groups:
        if g.patch_side != s:
            raise ValueError("groups mix patch sides")
        base = g.positions[:, 0] * w + g.positions[:, 1]
        idx_parts.append((base[:, None] + offs[None, :]).ravel())
        val_parts.append(np.ascontiguousarray(g.matrix.T).ravel())
    idx = np.concatenate(idx_parts)
    vals = np.concatenate(val_parts)
    counts = np.bincount(idx, minlength=n)
    if np.any(counts == 0):
        missing = int(np.sum(counts == 0))
        raise ValueError(f"aggregation left {missing} pixels uncovered")
    mean = np.bincount(idx, weights=vals, minlength=n) / counts
    resid = np.bincount(idx, weights=vals - mean[idx], minlength=n)
    return (mean + resid / counts).reshape(h, w)

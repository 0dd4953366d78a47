"""Compressive measurement operators and measurement noise.

All operators map a real (h, w) image to a real measurement vector of
length m ~= subrate * h * w and are fully determined by
(kind, image shape, subrate, seed), so a stored measurement file only
needs those fields to rebuild the operator exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

OPERATOR_KINDS = ("dense", "block", "dft")
NOISE_MODELS = ("none", "gaussian", "gaussian_mixture")

BLOCK_SIDE = 32


@dataclass(frozen=True)
class NoiseSpec:
    """Measurement noise description.

    model "gaussian_mixture" draws each entry from N(0, sigma**2) with
    probability 1 - xi and from N(0, kappa * sigma**2) with probability
    xi (sparse large outliers on top of a small-noise floor).  When
    target_snr_db is set the drawn noise vector is rescaled so the
    realized signal-to-noise ratio hits the target exactly; sigma then
    only fixes the shape of the mixture, not its scale.
    """

    model: str = "none"
    sigma: float = 1.0
    xi: float = 0.1
    kappa: float = 100.0
    target_snr_db: float | None = None

    def __post_init__(self):
        if self.model not in NOISE_MODELS:
            raise ValueError(f"unknown noise model {self.model!r}")
        if self.model != "none":
            if not self.sigma >= 0:
                raise ValueError("noise sigma must be >= 0")
            if self.model == "gaussian_mixture":
                if not 0.0 <= self.xi <= 1.0:
                    raise ValueError("mixture xi must lie in [0, 1]")
                if not self.kappa >= 1.0:
                    raise ValueError("mixture kappa must be >= 1")


class MeasurementOp:
    """Base class: forward/adjoint pair with recorded provenance."""

    kind = None

    def __init__(self, shape, subrate, seed):
        h, w = shape
        if h < 1 or w < 1:
            raise ValueError(f"bad image shape {shape}")
        if not 0.0 < subrate <= 1.0:
            raise ValueError(f"subrate must lie in (0, 1], got {subrate}")
        self.shape = (int(h), int(w))
        self.subrate = float(subrate)
        self.seed = int(seed)
        self.n = int(h) * int(w)
        self.m = 0  # set by subclasses

    def forward(self, image):
        raise NotImplementedError

    def adjoint(self, y):
        raise NotImplementedError

    def _check_image(self, image):
        x = np.asarray(image, dtype=float)
        if x.shape != self.shape:
            raise ValueError(f"expected image shape {self.shape}, got {x.shape}")
        return x

    def _check_y(self, y):
        v = np.asarray(y, dtype=float)
        if v.shape != (self.m,):
            raise ValueError(f"expected {self.m} measurements, got shape {v.shape}")
        return v


class DenseGaussianOp(MeasurementOp):
    """Dense i.i.d. Gaussian sensing matrix, entries N(0, 1/m)."""

    kind = "dense"

    def __init__(self, shape, subrate, seed):
        super().__init__(shape, subrate, seed)
        self.m = max(1, round(self.subrate * self.n))
        rng = np.random.default_rng(self.seed)
        self.a = rng.normal(0.0, 1.0 / math.sqrt(self.m), (self.m, self.n))

    def forward(self, image):
        return self.a @ self._check_image(image).ravel()

    def adjoint(self, y):
        return (self.a.T @ self._check_y(y)).reshape(self.shape)


class BlockGaussianOp(MeasurementOp):
    """Independent Gaussian projection per 32x32 image block.

    The image is tiled into BLOCK_SIDE x BLOCK_SIDE blocks in raster
    order; each block gets its own Gaussian matrix and the per-block
    measurements are concatenated.  Row counts are spread so the total
    equals round(subrate * n) exactly.
    """

    kind = "block"

    def __init__(self, shape, subrate, seed):
        super().__init__(shape, subrate, seed)
        h, w = self.shape
        if h % BLOCK_SIDE or w % BLOCK_SIDE:
            raise ValueError(
                f"image shape {shape} not a multiple of {BLOCK_SIDE}"
            )
        self.grid = (h // BLOCK_SIDE, w // BLOCK_SIDE)
        n_blocks = self.grid[0] * self.grid[1]
        total = max(1, round(self.subrate * self.n))
        base, extra = divmod(total, n_blocks)
        rng = np.random.default_rng(self.seed)
        self.mats = []
        for b in range(n_blocks):
            rows = base + (1 if b < extra else 0)
            scale = 1.0 / math.sqrt(rows) if rows else 1.0
            self.mats.append(
                rng.normal(0.0, scale, (rows, BLOCK_SIDE * BLOCK_SIDE))
            )
        self.m = total

    def _blocks(self, x):
        for br in range(self.grid[0]):
            for bc in range(self.grid[1]):
                yield x[
                    br * BLOCK_SIDE : (br + 1) * BLOCK_SIDE,
                    bc * BLOCK_SIDE : (bc + 1) * BLOCK_SIDE,
                ]

    def forward(self, image):
        x = self._check_image(image)
        return np.concatenate(
            [a @ blk.ravel() for a, blk in zip(self.mats, self._blocks(x))]
        )

    def adjoint(self, y):
        v = self._check_y(y)
        out = np.zeros(self.shape)
        pos = 0
        it = iter(self.mats)
        for br in range(self.grid[0]):
            for bc in range(self.grid[1]):
                a = next(it)
                part = a.T @ v[pos : pos + a.shape[0]]
                out[
                    br * BLOCK_SIDE : (br + 1) * BLOCK_SIDE,
                    bc * BLOCK_SIDE : (bc + 1) * BLOCK_SIDE,
                ] = part.reshape(BLOCK_SIDE, BLOCK_SIDE)
                pos += a.shape[0]
        return out

    @property
    def a(self):
        # Dense equivalent, for small-scale verification only.
        mat = np.zeros((self.m, self.n))
        h, w = self.shape
        pos = 0
        idx = np.arange(self.n).reshape(self.shape)
        it = iter(self.mats)
        for br in range(self.grid[0]):
            for bc in range(self.grid[1]):
                a = next(it)
                cols = idx[
                    br * BLOCK_SIDE : (br + 1) * BLOCK_SIDE,
                    bc * BLOCK_SIDE : (bc + 1) * BLOCK_SIDE,
                ].ravel()
                mat[pos : pos + a.shape[0], cols] = a
                pos += a.shape[0]
        return mat


class MaskedDftOp(MeasurementOp):
    """Random conjugate-symmetric mask over the unitary 2-D DFT.

    Frequencies are selected in conjugate orbits so measurements of a
    real image carry no redundancy: a self-conjugate frequency (DC,
    Nyquist lines) contributes its real part, a conjugate pair
    contributes sqrt(2) times the real and imaginary parts of one
    representative.  This packing makes the operator rows orthonormal.
    The DC orbit is always included; remaining orbits are drawn in
    seeded random order until the measurement count reaches
    round(subrate * n), so the realized count overshoots by at most one.
    """

    kind = "dft"

    def __init__(self, shape, subrate, seed):
        super().__init__(shape, subrate, seed)
        h, w = self.shape
        target = max(1, round(self.subrate * self.n))
        orbits = []
        seen = set()
        for u in range(h):
            for v in range(w):
                partner = ((-u) % h, (-v) % w)
                rep = min((u, v), partner)
                if rep not in seen:
                    seen.add(rep)
                    orbits.append(rep)
        rest = [o for o in orbits if o != (0, 0)]
        rng = np.random.default_rng(self.seed)
        order = rng.permutation(len(rest))
        chosen = [(0, 0)]
        count = 1
        for k in order:
            if count >= target:
                break
            u, v = rest[k]
            chosen.append((u, v))
            count += 1 if ((-u) % h, (-v) % w) == (u, v) else 2
        self.reps = sorted(chosen)
        self.selfconj = [
            ((-u) % h, (-v) % w) == (u, v) for (u, v) in self.reps
        ]
        self.m = count

    def forward(self, image):
        x = self._check_image(image)
        spec = np.fft.fft2(x, norm="ortho")
        out = np.empty(self.m)
        pos = 0
        for (u, v), sc in zip(self.reps, self.selfconj):
            if sc:
                out[pos] = spec[u, v].real
                pos += 1
            else:
                out[pos] = math.sqrt(2.0) * spec[u, v].real
                out[pos + 1] = math.sqrt(2.0) * spec[u, v].imag
                pos += 2
        return out

    def adjoint(self, y):
        v = self._check_y(y)
        h, w = self.shape
        spec = np.zeros((h, w), dtype=complex)
        pos = 0
        for (fu, fv), sc in zip(self.reps, self.selfconj):
            if sc:
                spec[fu, fv] = v[pos]
                pos += 1
            else:
                val = (v[pos] + 1j * v[pos + 1]) / math.sqrt(2.0)
                spec[fu, fv] = val
                spec[(-fu) % h, (-fv) % w] = np.conj(val)
                pos += 2
        return np.fft.ifft2(spec, norm="ortho").real


_OPS = {"dense": DenseGaussianOp, "block": BlockGaussianOp, "dft": MaskedDftOp}


def make_operator(kind, shape, subrate, seed):
    """Instantiate an operator by kind name."""
    if kind not in _OPS:
        raise ValueError(f"unknown operator kind {kind!r}")
    return _OPS[kind](shape, subrate, seed)


def add_noise(y, spec: NoiseSpec, seed):
    """Corrupt measurements according to the noise spec.

    Returns (noisy, noise, realized_snr_db) where
    snr_db = 20*log10(||y - mean(y)|| / ||noise||); the mean removal
    treats the empirical mean of the clean measurements as the signal
    baseline.  When target_snr_db is set the noise is rescaled to hit it
    exactly.  With model "none" the realized SNR is +inf.
    """
    y = np.asarray(y, dtype=float)
    if spec.model == "none":
        return y.copy(), np.zeros_like(y), math.inf
    rng = np.random.default_rng(seed)
    sigma = spec.sigma if spec.sigma > 0 else 1.0
    if spec.model == "gaussian":
        noise = rng.normal(0.0, sigma, y.shape)
    else:
        outlier = rng.random(y.shape) < spec.xi
        scales = np.where(outlier, sigma * math.sqrt(spec.kappa), sigma)
        noise = rng.standard_normal(y.shape) * scales
    signal = np.linalg.norm(y - np.mean(y))
    if spec.target_snr_db is not None:
        want = signal * 10.0 ** (-spec.target_snr_db / 20.0)
        nn = np.linalg.norm(noise)
        if nn == 0.0 or signal == 0.0:
            raise ValueError("cannot rescale noise to a target SNR here")
        noise = noise * (want / nn)
    nn = np.linalg.norm(noise)
    if nn == 0.0:
        realized = math.inf
    elif signal == 0.0:
        realized = -math.inf
    else:
        realized = 20.0 * math.log10(signal / nn)
    return y + noise, noise, realized


def operator_norm_estimate(op, iters=200, tol=1e-4):
    """Largest singular value of the operator by power iteration.

    Deterministic: the start vector is drawn from the operator's own
    seed.  Runs at most `iters` iterations, stopping when the estimate
    moves by less than `tol` relative.
    """
    rng = np.random.default_rng(op.seed + 0x9E3779B9)
    v = rng.standard_normal(op.shape)
    nv = np.linalg.norm(v)
    if nv == 0.0:
        raise ValueError("degenerate start vector")
    v /= nv
    est = 0.0
    for _ in range(iters):
        z = op.forward(v)
        new_est = np.linalg.norm(z)
        v = op.adjoint(z)
        nv = np.linalg.norm(v)
        if nv == 0.0:
            return 0.0
        v /= nv
        if est > 0 and abs(new_est - est) <= tol * est:
            return new_est
        est = new_est
    return est

"""Weighted singular value thresholding and the reweighted denoiser,
checked against spectrum-level oracles built from plain numpy SVDs."""

import numpy as np
import pytest

from groupcs import (
    Penalty,
    group_weights,
    irnn_denoise_group,
    rank_sparsity_check,
    svd_small,
    wsvt,
)


def compose(u, s, vt):
    return (u * s) @ vt


def random_with_spectrum(rng, shape, spectrum):
    """Build a matrix with prescribed singular values."""
    a = rng.normal(size=(shape[0], shape[0]))
    b = rng.normal(size=(shape[1], shape[1]))
    qu, _ = np.linalg.qr(a)
    qv, _ = np.linalg.qr(b)
    k = len(spectrum)
    return compose(qu[:, :k], np.asarray(spectrum, dtype=float), qv[:, :k].T)


# ----------------------------------------------------------------- svd_small


def test_svd_diagonal():
    m = np.zeros((3, 4))
    m[0, 0], m[1, 1] = 3.0, 1.0
    f = svd_small(m)
    np.testing.assert_allclose(f.s, [3.0, 1.0, 0.0], atol=1e-12)


def test_svd_zero_matrix():
    f = svd_small(np.zeros((3, 4)))
    np.testing.assert_array_equal(f.s, np.zeros(3))


def test_svd_reconstructs(rng):
    m = rng.normal(size=(4, 6))
    f = svd_small(m)
    assert np.linalg.norm(compose(f.u, f.s, f.vt) - m) <= 1e-9


def test_svd_sign_convention(rng):
    m = rng.normal(size=(5, 5))
    f = svd_small(m)
    for j in range(5):
        col = f.u[:, j]
        nz = np.nonzero(col)[0]
        assert col[nz[0]] > 0
    # deterministic: a second call gives identical factors
    f2 = svd_small(m)
    np.testing.assert_array_equal(f.u, f2.u)
    np.testing.assert_array_equal(f.vt, f2.vt)


def test_svd_rejects_non_finite():
    with pytest.raises(ValueError):
        svd_small(np.array([[1.0, np.nan]]))


# ---------------------------------------------------------------------- wsvt


def test_wsvt_zero_weights_identity(rng):
    m = rng.normal(size=(3, 4))
    assert np.linalg.norm(wsvt(m, np.zeros(3), 1.0) - m) <= 1e-9


def test_wsvt_full_truncation(rng):
    m = rng.normal(size=(3, 4))
    s1 = np.linalg.svd(m, compute_uv=False)[0]
    out = wsvt(m, np.full(3, 2 * s1), 1.0)
    np.testing.assert_allclose(out, 0.0, atol=1e-12)


def test_wsvt_known_spectrum(rng):
    m = random_with_spectrum(rng, (3, 4), [3.0, 1.0, 0.0])
    out = wsvt(m, np.array([0.5, 2.0, 3.0]), 1.0)
    s = np.linalg.svd(out, compute_uv=False)
    np.testing.assert_allclose(s, [2.5, 0.0, 0.0], atol=1e-9)


def test_wsvt_infinite_weight_truncates(rng):
    m = random_with_spectrum(rng, (3, 4), [3.0, 1.0, 0.5])
    out = wsvt(m, np.array([0.0, np.inf, np.inf]), 1.0)
    s = np.linalg.svd(out, compute_uv=False)
    np.testing.assert_allclose(s, [3.0, 0.0, 0.0], atol=1e-9)


def test_wsvt_tau_zero_ignores_infinite_weights(rng):
    m = rng.normal(size=(3, 4))
    out = wsvt(m, np.array([0.0, 1.0, np.inf]), 0.0)
    assert np.linalg.norm(out - m) <= 1e-9


def test_wsvt_rejects_bad_weights(rng):
    m = rng.normal(size=(3, 4))
    with pytest.raises(ValueError):
        wsvt(m, np.array([1.0, 0.5, 2.0]), 1.0)  # decreasing
    with pytest.raises(ValueError):
        wsvt(m, np.array([-0.1, 0.5, 2.0]), 1.0)
    with pytest.raises(ValueError):
        wsvt(m, np.array([0.1, np.nan, 2.0]), 1.0)
    with pytest.raises(ValueError):
        wsvt(m, np.zeros(2), 1.0)  # wrong length
    with pytest.raises(ValueError):
        wsvt(m, np.zeros(3), -1.0)
    with pytest.raises(ValueError):
        wsvt(m, np.zeros(3), np.inf)


def test_wsvt_minimizes_weighted_objective(rng):
    """No spectrum perturbation of the output may improve the objective."""
    tau = 0.7
    for _ in range(20):
        m = rng.normal(size=(3, 4))
        w = np.sort(rng.uniform(0, 2, 3))
        out = wsvt(m, w, tau)
        f = svd_small(m)
        s_out = np.maximum(f.s - tau * w, 0.0)

        def obj(s):
            z = compose(f.u, s, f.vt)
            return 0.5 * np.sum((m - z) ** 2) + tau * np.sum(w * s)

        base = obj(s_out)
        assert np.allclose(
            np.linalg.svd(out, compute_uv=False), np.sort(s_out)[::-1], atol=1e-9
        )
        for _ in range(50):
            pert = np.maximum(s_out + rng.normal(0, 0.3, 3), 0.0)
            assert obj(pert) >= base - 1e-9


# ------------------------------------------------------------ rank diagnostic


def test_rank_of_outer_product(rng):
    u = rng.normal(size=4)
    v = rng.normal(size=6)
    assert rank_sparsity_check(np.outer(u, v)) == (1, 1)


def test_rank_of_random_full(rng):
    assert rank_sparsity_check(rng.normal(size=(4, 6))) == (4, 4)


def test_rank_of_zero():
    assert rank_sparsity_check(np.zeros((3, 5))) == (0, 0)


# --------------------------------------------------------------- weight rules


def test_weights_none_is_ones():
    pen = Penalty("log", 1.0, 1.5)
    np.testing.assert_array_equal(
        group_weights(np.array([5.0, 2.0, 0.0]), pen, "none"), np.ones(3)
    )


def test_weights_supergradient_formula():
    pen = Penalty("log", 1.0, 1.5)
    s = np.array([4.0, 2.0, 0.5])
    w = group_weights(s, pen, "supergradient")
    expected = 1.5 / (np.log(2.5) * (1.5 * s + 1))
    np.testing.assert_allclose(w, expected, rtol=1e-12)
    assert np.all(np.diff(w) >= 0)


def test_weights_combined_formula():
    pen = Penalty("log", 1.0, 1.5)
    s = np.array([4.0, 2.0, 0.5])
    eps = 1e-3
    w = group_weights(s, pen, "combined", epsilon=eps)
    expected = 1.5 / (np.log(2.5) * (1.5 * s + 1)) / (s + eps)
    np.testing.assert_allclose(w, expected, rtol=1e-12)
    assert np.all(np.diff(w) >= 0)


def test_weights_clipped_nondecreasing():
    # mcp supergradient hits exactly 0 past the knee; an increasing tail in
    # sigma would make the raw weights decrease without the running max
    pen = Penalty("mcp", 1.0, 1.5)
    w = group_weights(np.array([5.0, 1.0, 0.5]), pen, "supergradient")
    assert np.all(np.diff(w) >= 0)


# ------------------------------------------------------------------- denoiser


def log_supergradient(s):
    # hand-written formula for lam=1, shape=1.5
    return 1.5 / (np.log(2.5) * (1.5 * np.asarray(s, dtype=float) + 1))


def test_denoise_zero_lambda_is_identity(rng):
    m = rng.normal(size=(3, 3))
    res = irnn_denoise_group(m, Penalty("log", 0.0, 1.5), 0.5, "supergradient")
    assert np.linalg.norm(res.matrix - m) <= 1e-9


def test_denoise_huge_tau_zeroes(rng):
    m = rng.normal(size=(3, 3))
    res = irnn_denoise_group(m, Penalty("log", 1.0, 1.5), 1e9, "supergradient")
    np.testing.assert_allclose(res.matrix, 0.0, atol=1e-9)


def test_denoise_tau_zero_identity(rng):
    m = rng.normal(size=(3, 3))
    res = irnn_denoise_group(m, Penalty("log", 1.0, 1.5), 0.0)
    np.testing.assert_array_equal(res.matrix, m)


def test_denoise_single_sweep_matches_spectrum_oracle(rng):
    """One supergradient sweep equals shrinking the input spectrum by
    tau * grad(sigma), rebuilt with the input's singular vectors."""
    tau = 0.5
    for _ in range(10):
        m = rng.normal(size=(3, 3))
        u, s, vt = np.linalg.svd(m, full_matrices=False)
        expect_s = np.maximum(s - tau * log_supergradient(s), 0.0)
        res = irnn_denoise_group(
            m, Penalty("log", 1.0, 1.5), tau, "supergradient", sweeps=1
        )
        np.testing.assert_allclose(res.spectrum, expect_s, atol=1e-9)
        np.testing.assert_allclose(
            np.linalg.svd(res.matrix, compute_uv=False), expect_s, atol=1e-9
        )


def test_denoise_zero_init_uses_origin_slope(rng):
    """init_weights='zero' weights every singular value by grad(0)."""
    tau = 0.5
    m = rng.normal(size=(3, 3))
    s = np.linalg.svd(m, compute_uv=False)
    expect_s = np.maximum(s - tau * log_supergradient(0.0), 0.0)
    res = irnn_denoise_group(
        m, Penalty("log", 1.0, 1.5), tau, "supergradient", sweeps=1,
        init_weights="zero",
    )
    np.testing.assert_allclose(res.spectrum, expect_s, atol=1e-9)


def test_denoise_weight_ordering_every_sweep(rng):
    for kind, shape in [("log", 1.5), ("mcp", 1.5), ("scad", 3.7), ("lp", 0.5)]:
        m = rng.normal(size=(6, 10)) * 3
        res = irnn_denoise_group(
            m, Penalty(kind, 1.0, shape), 0.8, "supergradient", sweeps=6
        )
        for w in res.weights_trace:
            assert np.all(w >= 0)
            assert np.all(np.diff(w) >= 0)


def test_denoise_objective_nonincreasing(rng):
    for _ in range(10):
        m = rng.normal(size=(6, 10)) * 2
        res = irnn_denoise_group(
            m, Penalty("log", 1.0, 1.5), 1.0, "supergradient", sweeps=8
        )
        obj = np.asarray(res.objective_trace)
        scale = max(1.0, abs(obj[0]))
        assert np.all(np.diff(obj) <= 1e-8 * scale)


def test_denoise_rejects_bad_arguments(rng):
    m = rng.normal(size=(3, 3))
    pen = Penalty("log", 1.0, 1.5)
    with pytest.raises(ValueError):
        irnn_denoise_group(m, pen, 0.5, sweeps=0)
    with pytest.raises(ValueError):
        irnn_denoise_group(m, pen, 0.5, init_weights="spectral")
    with pytest.raises(ValueError):
        irnn_denoise_group(m, pen, 0.5, weighting="softmax")

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

import oracles
from ssrlsc.datamodel import HyperCube, make_synthetic
from ssrlsc.filter import FilterParams, box_mean, filter_cube, guided_filter_band, pca_guidance


def test_guidance_rank_one(rng, backend):
    b = rng.normal(size=(5, 6))
    cube = HyperCube(np.stack([b, b, b], axis=2))
    g = pca_guidance(cube, backend=backend)
    centered = b - b.mean()
    # Leading vector is (1,1,1)/sqrt(3), so the score is sqrt(3) * centered band.
    np.testing.assert_allclose(g, np.sqrt(3) * centered, atol=1e-12)


def test_guidance_opposite_bands(rng, backend):
    b = rng.normal(size=(4, 4))
    cube = HyperCube(np.stack([b, -b], axis=2))
    g = pca_guidance(cube, backend=backend)
    c1, c2 = b - b.mean(), -b + b.mean()
    # Eigenvector (1, -1)/sqrt(2): magnitudes tie, first entry taken positive.
    np.testing.assert_allclose(g, (c1 - c2) / np.sqrt(2), atol=1e-12)


def test_guidance_constant_cube():
    with pytest.raises(ValueError, match="zero variance"):
        pca_guidance(HyperCube(np.ones((3, 3, 2))))


def test_constant_input_exact(rng):
    guide = rng.normal(size=(7, 6))
    p = np.full((7, 6), 3.7)
    out = guided_filter_band(p, guide, FilterParams(2, 0.1))
    assert np.all(out == 3.7)


def test_identity_exact(rng):
    guide = rng.normal(size=(8, 9))
    out = guided_filter_band(guide, guide, FilterParams(1, 0.0))
    assert np.array_equal(out, guide)


@pytest.mark.parametrize("seed", range(3))
def test_matches_window_oracle_5x5(seed):
    r = np.random.default_rng(seed)
    p, guide = r.normal(size=(5, 5)), r.normal(size=(5, 5))
    out = guided_filter_band(p, guide, FilterParams(1, 0.1))
    assert np.max(np.abs(out - oracles.guided_filter(p, guide, 1, 0.1))) <= 1e-10


def test_shape_mismatch():
    with pytest.raises(ValueError, match="shape mismatch"):
        guided_filter_band(np.zeros((3, 3)), np.zeros((3, 4)))


def test_large_eps_limit(rng):
    # a -> 0 leaves f = mean of b_k = mean(P)_k over covering windows: two box passes.
    p, guide = rng.normal(size=(9, 7)), rng.normal(size=(9, 7))
    out = guided_filter_band(p, guide, FilterParams(2, 1e12))
    np.testing.assert_allclose(out, oracles.box_mean(oracles.box_mean(p, 2), 2), atol=1e-6)


def test_box_mean_matches_loop(rng):
    x = rng.normal(size=(6, 8))
    for r in (0, 1, 3, 10):
        np.testing.assert_allclose(box_mean(x, r), oracles.box_mean(x, r), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(
    hnp.arrays(np.float64, (6, 5), elements=st.floats(-10, 10)),
    hnp.arrays(np.float64, (6, 5), elements=st.floats(-10, 10)),
    st.floats(-50, 50),
    st.integers(0, 3),
    st.floats(1e-3, 10),
)
def test_shift_invariance(p, guide, shift, radius, eps):
    params = FilterParams(radius, eps)
    base = guided_filter_band(p, guide, params)
    moved = guided_filter_band(p + shift, guide, params)
    assert np.all(np.isfinite(base))
    scale = max(1.0, np.abs(p).max(), abs(shift))
    np.testing.assert_allclose(moved, base + shift, atol=1e-11 * scale * (1 + 1 / eps))


def test_filter_cube_per_band_matches_band_filter(rng, backend):
    cube = HyperCube(rng.normal(size=(6, 7, 3)))
    params = FilterParams(1, 0.05)
    out = filter_cube(cube, params, backend=backend)
    g = pca_guidance(cube, backend=backend)
    g = (g - g.mean()) / g.std()
    for k in range(3):
        assert np.array_equal(out.values[:, :, k], guided_filter_band(cube.values[:, :, k], g, params))


def test_filter_cube_single_band_identity(rng):
    band = rng.normal(size=(6, 6))
    cube = HyperCube(band[:, :, None])
    out = filter_cube(cube, FilterParams(1, 0.0))
    np.testing.assert_allclose(out.values, cube.values, atol=1e-10)


def test_filter_cube_zero_noise_block_interiors():
    cube, grid = make_synthetic(3, 2, 8, 6, 5.0, 0.0, seed=2)
    r = 1
    out = filter_cube(cube, FilterParams(r, 0.01))
    assert out.shape == cube.shape
    # Pixels at least 2r from every block edge see only constant windows.
    interior = np.zeros(grid.labels.shape, dtype=bool)
    for br in range(0, grid.height, 8):
        for bc in range(0, grid.width, 8):
            interior[br + 2 * r : br + 8 - 2 * r, bc + 2 * r : bc + 8 - 2 * r] = True
    np.testing.assert_allclose(out.values[interior], cube.values[interior], atol=1e-12)


def _block_var(vals, margin, size=8):
    per_block = []
    for br in range(0, vals.shape[0], size):
        for bc in range(0, vals.shape[1], size):
            blk = vals[br + margin : br + size - margin, bc + margin : bc + size - margin]
            per_block.append(blk.reshape(-1, vals.shape[2]).var(axis=0))
    return np.mean(per_block, axis=0)


@pytest.mark.parametrize("seed", range(5))
def test_filter_cube_reduces_block_variance_two_classes(seed):
    # With two classes the guidance separates them, so whole blocks smooth.
    cube, _ = make_synthetic(2, 2, 8, 6, 5.0, 0.2, seed=seed)
    out = filter_cube(cube, FilterParams(1, 0.01))
    assert np.all(_block_var(out.values, 0) < _block_var(cube.values, 0))


@pytest.mark.parametrize("seed", range(5))
def test_filter_cube_reduces_block_interior_variance(seed):
    # A single guidance image cannot separate every pair among three classes,
    # so edges can blur; pixels at least r inside each block still smooth.
    cube, _ = make_synthetic(3, 2, 8, 6, 5.0, 0.2, seed=seed)
    out = filter_cube(cube, FilterParams(1, 0.01))
    assert np.all(_block_var(out.values, 1) < _block_var(cube.values, 1))

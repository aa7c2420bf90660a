"""PCA-guided edge-preserving filtering of a spectral cube.

Window statistics come from summed-area tables, so the cost per pixel does
not depend on the radius. Windows are clipped at the image border and
their means taken over in-bounds pixels only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datamodel import HyperCube
from .eig import sym_eig


@dataclass(frozen=True)
class FilterParams:
    radius: int = 1
    epsilon: float = 0.01

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("radius must be >= 0")
        if not self.epsilon >= 0:
            raise ValueError("epsilon must be >= 0")


def box_sum(x: np.ndarray, radius: int) -> np.ndarray:
    """Sum over the clipped (2r+1)^2 window around each pixel.

    ``x`` is (H, W) or (H, W, K); the leading two axes are spatial.
    """
    h, w = x.shape[:2]
    pad = np.zeros((h + 1, w + 1) + x.shape[2:], dtype=np.float64)
    pad[1:, 1:] = x
    sat = pad.cumsum(axis=0).cumsum(axis=1)
    r0 = np.clip(np.arange(h) - radius, 0, h)
    r1 = np.clip(np.arange(h) + radius + 1, 0, h)
    c0 = np.clip(np.arange(w) - radius, 0, w)
    c1 = np.clip(np.arange(w) + radius + 1, 0, w)
    return (
        sat[r1][:, c1]
        - sat[r0][:, c1]
        - sat[r1][:, c0]
        + sat[r0][:, c0]
    )


def window_counts(h: int, w: int, radius: int) -> np.ndarray:
    rows = np.minimum(np.arange(h) + radius, h - 1) - np.maximum(np.arange(h) - radius, 0) + 1
    cols = np.minimum(np.arange(w) + radius, w - 1) - np.maximum(np.arange(w) - radius, 0) + 1
    return np.outer(rows, cols).astype(np.float64)


def box_mean(x: np.ndarray, radius: int) -> np.ndarray:
    n = window_counts(x.shape[0], x.shape[1], radius)
    if x.ndim == 3:
        n = n[:, :, None]
    return box_sum(x, radius) / n


def pca_guidance(cube: HyperCube, backend=None) -> np.ndarray:
    """First principal-component score of every pixel, as an (H, W) grid.

    The component is the leading eigenvector of the band covariance over
    all pixels, signed so its largest-magnitude loading is positive.
    """
    if cube.height * cube.width < 2:
        raise ValueError("PCA guidance needs at least 2 pixels")
    pix = cube.pixels()
    centered = pix - pix.mean(axis=0)
    cov = centered.T @ centered / (len(pix) - 1)
    if not np.trace(cov) > 0:
        raise ValueError("cube has zero variance; PCA guidance is undefined")
    _, vecs = sym_eig(cov, backend=backend)
    return (centered @ vecs[:, 0]).reshape(cube.height, cube.width)


def _guided(p: np.ndarray, guide: np.ndarray, params: FilterParams) -> np.ndarray:
    # p is (H, W, K); guide is (H, W)
    r, eps = params.radius, params.epsilon
    g = guide[:, :, None]
    mean_i = box_mean(guide, r)[:, :, None]
    mean_p = box_mean(p, r)
    corr_ip = box_mean(g * p, r)
    var_i = box_mean(guide * guide, r)[:, :, None] - mean_i * mean_i
    var_i = np.maximum(var_i, 0.0)
    denom = var_i + eps
    cov_ip = corr_ip - mean_i * mean_p
    safe = denom > 0
    # Flat guide window with eps == 0: a = 0 gives b = mean(P).
    a = np.where(safe, cov_ip / np.where(safe, denom, 1.0), 0.0)
    b = mean_p - a * mean_i
    out = box_mean(a, r) * g + box_mean(b, r)
    # Constant bands come back unchanged rather than with box-sum rounding.
    flat = np.all(p == p[:1, :1, :], axis=(0, 1))
    out[:, :, flat] = p[:, :, flat]
    return out


def guided_filter_band(p, guide, params: FilterParams = FilterParams()) -> np.ndarray:
    """Filter one (H, W) grid ``p`` with guidance ``guide``."""
    p = np.asarray(p, dtype=np.float64)
    guide = np.asarray(guide, dtype=np.float64)
    if p.ndim != 2 or p.shape != guide.shape:
        raise ValueError(f"shape mismatch: input {p.shape}, guide {guide.shape}")
    return _guided(p[:, :, None], guide, params)[:, :, 0]


def standardized_guidance(cube: HyperCube, backend=None) -> np.ndarray:
    g = pca_guidance(cube, backend=backend)
    return (g - g.mean()) / g.std()


def filter_cube(cube: HyperCube, params: FilterParams = FilterParams(), backend=None) -> HyperCube:
    """Guided-filter every band with one standardized PCA guidance image."""
    guide = standardized_guidance(cube, backend=backend)
    return HyperCube(_guided(cube.values, guide, params))

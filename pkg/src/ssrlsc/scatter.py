"""Spectral and spatial dissimilarity matrices and their fusion.

All matrices are (D, D) float64 arrays, symmetrized as (M + M^T) / 2 after
accumulation.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .datamodel import HyperCube, SampleSet
from .graph import NeighborLists


@dataclass(frozen=True)
class RegularizationParams:
    alpha: float = 0.5
    beta: float = 0.3
    gamma: float | None = None  # None -> 1 / bands

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if self.gamma is not None and not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")

    def gamma_for(self, bands: int) -> float:
        return 1.0 / bands if self.gamma is None else self.gamma


def validate_scatter(m, name="scatter matrix", psd=True) -> None:
    """Raise ``ValueError`` unless ``m`` is symmetric (and PSD if requested)."""
    m = np.asarray(m)
    gap = np.abs(m - m.T)
    if np.any(gap > 1e-9 * np.maximum(1.0, np.abs(m))):
        raise ValueError(f"{name} is not symmetric (max gap {gap.max():.3g})")
    if psd:
        tr = np.trace(m)
        lowest = np.linalg.eigvalsh(m)[0] if m.size else 0.0
        if lowest < -1e-8 * max(tr, 0.0):
            raise ValueError(f"{name} is not PSD (smallest eigenvalue {lowest:.3g})")


def _chunks(n: int, parts: int):
    bounds = np.linspace(0, n, parts + 1).astype(int)
    return [(bounds[k], bounds[k + 1]) for k in range(parts) if bounds[k + 1] > bounds[k]]


def weighted_outer_sum(diffs: np.ndarray, weights: np.ndarray, dim: int, n_jobs: int = 1) -> np.ndarray:
    """``sum_t weights[t] * diffs[t] diffs[t]^T``, symmetrized.

    With ``n_jobs > 1`` the rows are split into contiguous blocks whose
    partial sums are merged in block order.
    """
    out = np.zeros((dim, dim))
    if len(diffs):
        if n_jobs <= 1:
            out = (diffs * weights[:, None]).T @ diffs
        else:
            def part(bounds):
                lo, hi = bounds
                d = diffs[lo:hi]
                return (d * weights[lo:hi, None]).T @ d

            with ThreadPoolExecutor(max_workers=n_jobs) as pool:
                for partial in pool.map(part, _chunks(len(diffs), n_jobs)):
                    out += partial
    return 0.5 * (out + out.T)


def _pair_terms(samples: SampleSet, lists, kind: str):
    x = samples.features
    labels = samples.labels
    class_sizes = {c: int(np.sum(labels == c)) for c in np.unique(labels)}
    rows, cols, weights = [], [], []
    starved = set()
    for i, nb in enumerate(lists):
        if len(nb) == 0:
            starved.add(int(labels[i]))
            continue
        rows.append(np.full(len(nb), i))
        cols.append(nb)
        weights.append(np.full(len(nb), 1.0 / (class_sizes[labels[i]] * len(nb))))
    # k >= 1, so an empty within-list only happens for a singleton class.
    if kind == "within" and starved:
        warnings.warn(
            f"classes {sorted(starved)} have no within-class neighbors and add nothing "
            "to the within-class matrix",
            RuntimeWarning,
            stacklevel=3,
        )
    if not rows:
        return np.zeros((0, x.shape[1])), np.zeros(0)
    rows, cols = np.concatenate(rows), np.concatenate(cols)
    return x[rows] - x[cols], np.concatenate(weights)


def spectral_scatter(samples: SampleSet, nbrs: NeighborLists, n_jobs: int = 1):
    """Between- and within-class kNN dissimilarity matrices ``(S_b, S_w)``.

    Each pair (i, j) is weighted by ``1 / (N_c * k)`` where ``N_c`` is the
    size of i's class and ``k`` the actual length of i's neighbor list.
    """
    if len(nbrs) != len(samples):
        raise ValueError("neighbor lists do not match the sample set")
    d = samples.dim
    diffs_b, w_b = _pair_terms(samples, nbrs.between, "between")
    diffs_w, w_w = _pair_terms(samples, nbrs.within, "within")
    return (
        weighted_outer_sum(diffs_b, w_b, d, n_jobs),
        weighted_outer_sum(diffs_w, w_w, d, n_jobs),
    )


def regularize_spectral(s_b, s_w, samples: SampleSet, alpha: float):
    """Blend in the covariance and diagonal regularizers.

    ``R_b`` is the covariance of the (centered) training spectra, i.e.
    ``X_c X_c^T / N``; ``R_w`` keeps only the diagonal of ``s_w``.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    xc = samples.features - samples.features.mean(axis=0)
    r_b = xc.T @ xc / len(samples)
    r_b = 0.5 * (r_b + r_b.T)
    r_w = np.diag(np.diag(s_w))
    return (1.0 - alpha) * s_b + alpha * r_b, (1.0 - alpha) * s_w + alpha * r_w


def patch_pixels(cube: HyperCube, row: int, col: int, window: int) -> np.ndarray:
    """Spectra of the in-bounds window x window patch centred at (row, col)."""
    h = window // 2
    r0, r1 = max(row - h, 0), min(row + h + 1, cube.height)
    c0, c1 = max(col - h, 0), min(col + h + 1, cube.width)
    return cube.values[r0:r1, c0:c1, :].reshape(-1, cube.bands)


def patch_weights(xi: np.ndarray, patch: np.ndarray, gamma: float):
    """Differences ``xi - patch`` and their normalized exp(-gamma d^2) weights."""
    diffs = xi - patch
    d2 = np.einsum("ij,ij->i", diffs, diffs)
    # Shifting by the minimum leaves the normalized weights unchanged and avoids 0/0.
    w = np.exp(-gamma * (d2 - d2.min()))
    return diffs, w / w.sum()


def _spatial_terms(samples, cube, lists, window, gamma):
    x = samples.features
    pos = samples.positions
    diffs, weights = [], []
    for i, nb in enumerate(lists):
        for j in nb:
            patch = patch_pixels(cube, pos[j, 0], pos[j, 1], window)
            d, eta = patch_weights(x[i], patch, gamma)
            diffs.append(d)
            weights.append(eta)
    if not diffs:
        return np.zeros((0, x.shape[1])), np.zeros(0)
    return np.concatenate(diffs), np.concatenate(weights)


def spatial_scatter(
    samples: SampleSet,
    cube: HyperCube,
    nbrs: NeighborLists,
    window: int = 3,
    gamma: float | None = None,
    n_jobs: int = 1,
):
    """Patch-based between- and within-class matrices ``(S_b_spa, S_w_spa)``.

    For every spectral neighbor j of sample i, each pixel of the patch
    around j's position contributes ``eta (x_i - x_jk)(x_i - x_jk)^T`` with
    ``eta`` normalized over that patch. ``cube`` must live in the same
    feature space as ``samples`` (same scaling, same filtering).
    """
    if window < 1 or window % 2 == 0:
        raise ValueError(f"window must be odd and >= 1, got {window}")
    if cube.bands != samples.dim:
        raise ValueError(f"cube has {cube.bands} bands, samples have {samples.dim}")
    if len(nbrs) != len(samples):
        raise ValueError("neighbor lists do not match the sample set")
    gamma = 1.0 / cube.bands if gamma is None else float(gamma)
    if not gamma > 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    d = samples.dim
    db, wb = _spatial_terms(samples, cube, nbrs.between, window, gamma)
    dw, ww = _spatial_terms(samples, cube, nbrs.within, window, gamma)
    return weighted_outer_sum(db, wb, d, n_jobs), weighted_outer_sum(dw, ww, d, n_jobs)


def fuse(rs_b, rs_w, s_b_spa, s_w_spa, beta: float):
    """Spectral/spatial blend; returns ``(SS_b, T_ss)`` with ``T_ss = SS_w + SS_b``."""
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must be in [0, 1], got {beta}")
    shapes = {np.shape(m) for m in (rs_b, rs_w, s_b_spa, s_w_spa)}
    if len(shapes) != 1:
        raise ValueError(f"dimension mismatch among fused matrices: {sorted(shapes)}")
    ss_w = beta * rs_w + (1.0 - beta) * s_w_spa
    ss_b = beta * rs_b + (1.0 - beta) * s_b_spa
    return ss_b, ss_w + ss_b

"""Exact within-class and between-class nearest-neighbor lists."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datamodel import SampleSet


@dataclass(frozen=True)
class NeighborLists:
    """Per-sample neighbor indices, each list sorted by ascending distance.

    Lists are clipped to the available candidates, so ``within[i]`` may be
    shorter than ``k_w`` (empty for a singleton class).
    """

    within: tuple
    between: tuple
    k_w: int
    k_b: int

    def __len__(self) -> int:
        return len(self.within)


def squared_distances(x: np.ndarray) -> np.ndarray:
    """Full pairwise squared Euclidean distances by direct differencing."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty((len(x), len(x)))
    for i in range(len(x)):
        diff = x - x[i]
        out[i] = np.einsum("ij,ij->i", diff, diff)
    return out


def build_neighbors(samples: SampleSet, k_w: int = 7, k_b: int = 7) -> NeighborLists:
    """``k_w`` same-class and ``k_b`` other-class nearest neighbors per sample.

    Ties in distance go to the lower sample index.
    """
    if k_w < 1 or k_b < 1:
        raise ValueError("k_w and k_b must be >= 1")
    labels = samples.labels
    dist = squared_distances(samples.features)
    within, between = [], []
    for i in range(len(labels)):
        order = np.argsort(dist[i], kind="stable")
        same = labels[order] == labels[i]
        w = order[same & (order != i)][:k_w]
        b = order[~same][:k_b]
        within.append(w)
        between.append(b)
    return NeighborLists(tuple(within), tuple(between), k_w, k_b)

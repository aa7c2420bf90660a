"""Slow, direct reference computations.

None of these call into the package's numerical code; they re-derive each
quantity from its definition with plain loops.
"""

import math

import numpy as np


def knn_lists(x, labels, k_w, k_b):
    """Neighbor lists by sorting (distance, index) tuples per sample."""
    n = len(x)
    within, between = [], []
    for i in range(n):
        cand = []
        for j in range(n):
            d = sum((float(a) - float(b)) ** 2 for a, b in zip(x[i], x[j]))
            cand.append((d, j))
        cand.sort()
        within.append([j for d, j in cand if j != i and labels[j] == labels[i]][:k_w])
        between.append([j for d, j in cand if labels[j] != labels[i]][:k_b])
    return within, between


def spectral_scatter(x, labels, within, between):
    """Weighted outer-product sums with weight 1 / (class size * list length)."""
    dim = x.shape[1]
    s_b = np.zeros((dim, dim))
    s_w = np.zeros((dim, dim))
    for i in range(len(x)):
        n_c = sum(1 for lab in labels if lab == labels[i])
        for lists, out in ((between, s_b), (within, s_w)):
            for j in lists[i]:
                diff = x[i] - x[j]
                out += np.outer(diff, diff) / (n_c * len(lists[i]))
    return s_b, s_w


def spatial_scatter(x, positions, cube, within, between, window, gamma):
    """Triple loop over (sample, neighbor, patch pixel) with raw exp weights."""
    h, w, dim = cube.shape
    half = window // 2
    s_b = np.zeros((dim, dim))
    s_w = np.zeros((dim, dim))
    for lists, out in ((between, s_b), (within, s_w)):
        for i in range(len(x)):
            for j in lists[i]:
                r, c = positions[j]
                patch = []
                for dr in range(-half, half + 1):
                    for dc in range(-half, half + 1):
                        rr, cc = r + dr, c + dc
                        if 0 <= rr < h and 0 <= cc < w:
                            patch.append(cube[rr, cc])
                weights = [math.exp(-gamma * float(np.sum((x[i] - p) ** 2))) for p in patch]
                total = sum(weights)
                for p, wt in zip(patch, weights):
                    diff = x[i] - p
                    out += (wt / total) * np.outer(diff, diff)
    return s_b, s_w


def guided_filter(p, guide, radius, eps):
    """Solve every window's ridge least-squares problem, then average."""
    h, w = p.shape
    coef = {}
    for kr in range(h):
        for kc in range(w):
            rows = range(max(kr - radius, 0), min(kr + radius, h - 1) + 1)
            cols = range(max(kc - radius, 0), min(kc + radius, w - 1) + 1)
            ii = np.array([guide[r, c] for r in rows for c in cols])
            pp = np.array([p[r, c] for r in rows for c in cols])
            n = len(ii)
            # d/da, d/db of sum((a I + b - P)^2 + eps a^2) = 0
            lhs = np.array([[ii @ ii + n * eps, ii.sum()], [ii.sum(), n]])
            rhs = np.array([ii @ pp, pp.sum()])
            coef[kr, kc] = np.linalg.solve(lhs, rhs)
    out = np.zeros_like(p, dtype=float)
    for r in range(h):
        for c in range(w):
            vals = []
            for kr in range(max(r - radius, 0), min(r + radius, h - 1) + 1):
                for kc in range(max(c - radius, 0), min(c + radius, w - 1) + 1):
                    a, b = coef[kr, kc]
                    vals.append(a * guide[r, c] + b)
            out[r, c] = sum(vals) / len(vals)
    return out


def box_mean(x, radius):
    h, w = x.shape
    out = np.zeros_like(x, dtype=float)
    for r in range(h):
        for c in range(w):
            out[r, c] = x[max(r - radius, 0) : r + radius + 1, max(c - radius, 0) : c + radius + 1].mean()
    return out


def pencil_eigenvalues(a, b):
    """Eigenvalues of inv(b) @ a via a general (non-symmetric) solver, descending."""
    vals = np.linalg.eigvals(np.linalg.inv(b) @ a)
    return np.sort(vals.real)[::-1]


def kappa(cm):
    cm = np.asarray(cm, dtype=float)
    n = cm.sum()
    po = np.trace(cm) / n
    pe = sum(cm[c, :].sum() * cm[:, c].sum() for c in range(len(cm))) / n**2
    return (po - pe) / (1 - pe)

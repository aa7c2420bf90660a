"""Pure-Python (numpy) versions of the compiled kernels in ``_kernels.pyx``.

Both modules perform the same floating-point operations in the same order
per element; summations (off-diagonal norms, dot products) may round
differently, so cross-backend agreement is to tolerance, not bitwise.
"""

import math

import numpy as np


def jacobi_eigh(a, max_sweeps=100, tol=1e-15):
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Returns ``(w, v, sweeps)`` with unsorted eigenvalues ``w`` and the
    matching eigenvectors as the columns of ``v``.
    """
    a = np.array(a, dtype=np.float64, order="C", copy=True)
    n = a.shape[0]
    v = np.eye(n)
    norm = math.sqrt(float(np.sum(a * a)))
    if norm == 0.0 or n == 1:
        return np.diag(a).copy(), v, 0

    sweeps = 0
    offmask = ~np.eye(n, dtype=bool)
    while sweeps < max_sweeps:
        off = math.sqrt(float(np.sum(a[offmask] ** 2)))
        if off <= tol * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                app = a[p, p]
                aqq = a[q, q]
                g = 100.0 * abs(apq)
                if sweeps > 3 and abs(app) + g == abs(app) and abs(aqq) + g == abs(aqq):
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    continue
                theta = (aqq - app) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c

                cp = a[:, p].copy()
                cq = a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0

                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
        sweeps += 1
    return np.diag(a).copy(), v, sweeps


def pegasos_ovr(x, y, order, lam):
    """One-vs-rest Pegasos subgradient descent.

    ``x`` is (N, m) with any bias column already appended, ``y`` is (C, N)
    of +1/-1 targets and ``order`` the flattened visiting sequence of
    sample indices. Returns the (C, m) weight matrix.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n_classes = y.shape[0]
    m = x.shape[1]
    weights = np.zeros((n_classes, m))
    radius2 = 1.0 / lam
    for c in range(n_classes):
        w = np.zeros(m)
        yc = y[c]
        t = 0
        for idx in order:
            t += 1
            eta = 1.0 / (lam * t)
            xi = x[idx]
            margin = yc[idx] * float(np.dot(w, xi))
            w *= 1.0 - eta * lam
            if margin < 1.0:
                w += (eta * yc[idx]) * xi
            nrm2 = float(np.dot(w, w))
            if nrm2 > radius2:
                w *= math.sqrt(radius2 / nrm2)
        weights[c] = w
    return weights

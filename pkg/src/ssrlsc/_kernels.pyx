# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: cyclic Jacobi rotations and Pegasos updates.

Mirrors ``_fallback`` operation for operation.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs

cnp.import_array()


def jacobi_eigh(a_in, int max_sweeps=100, double tol=1e-15):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] a_arr = np.array(
        a_in, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t n = a_arr.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] v_arr = np.eye(n)
    cdef double[:, ::1] a = a_arr
    cdef double[:, ::1] v = v_arr
    cdef Py_ssize_t p, q, k
    cdef double norm = 0.0, off, apq, app, aqq, g, theta, t, c, s, x0, x1
    cdef int sweeps = 0

    for p in range(n):
        for q in range(n):
            norm += a[p, q] * a[p, q]
    norm = sqrt(norm)
    if norm == 0.0 or n == 1:
        return np.diag(a_arr).copy(), v_arr, 0

    while sweeps < max_sweeps:
        off = 0.0
        for p in range(n):
            for q in range(n):
                if p != q:
                    off += a[p, q] * a[p, q]
        if sqrt(off) <= tol * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                app = a[p, p]
                aqq = a[q, q]
                g = 100.0 * fabs(apq)
                if sweeps > 3 and fabs(app) + g == fabs(app) and fabs(aqq) + g == fabs(aqq):
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    continue
                theta = (aqq - app) / (2.0 * apq)
                if fabs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c

                for k in range(n):
                    x0 = a[k, p]
                    x1 = a[k, q]
                    a[k, p] = c * x0 - s * x1
                    a[k, q] = s * x0 + c * x1
                for k in range(n):
                    x0 = a[p, k]
                    x1 = a[q, k]
                    a[p, k] = c * x0 - s * x1
                    a[q, k] = s * x0 + c * x1
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0

                for k in range(n):
                    x0 = v[k, p]
                    x1 = v[k, q]
                    v[k, p] = c * x0 - s * x1
                    v[k, q] = s * x0 + c * x1
        sweeps += 1
    return np.diag(a_arr).copy(), v_arr, sweeps


def pegasos_ovr(x_in, y_in, order_in, double lam):
    cdef double[:, ::1] x = np.ascontiguousarray(x_in, dtype=np.float64)
    cdef double[:, ::1] y = np.ascontiguousarray(y_in, dtype=np.float64)
    cdef cnp.intp_t[::1] order = np.ascontiguousarray(order_in, dtype=np.intp)
    cdef Py_ssize_t n_classes = y.shape[0]
    cdef Py_ssize_t m = x.shape[1]
    cdef Py_ssize_t steps = order.shape[0]
    out = np.zeros((n_classes, m))
    cdef double[:, ::1] weights = out
    cdef double[::1] w = np.zeros(m)
    cdef double radius2 = 1.0 / lam
    cdef double eta, margin, shrink, step, nrm2, scale, yi
    cdef Py_ssize_t c, j, i, idx
    cdef long t

    for c in range(n_classes):
        for j in range(m):
            w[j] = 0.0
        t = 0
        for i in range(steps):
            idx = order[i]
            t += 1
            eta = 1.0 / (lam * t)
            yi = y[c, idx]
            margin = 0.0
            for j in range(m):
                margin += w[j] * x[idx, j]
            margin = yi * margin
            shrink = 1.0 - eta * lam
            for j in range(m):
                w[j] *= shrink
            if margin < 1.0:
                step = eta * yi
                for j in range(m):
                    w[j] += step * x[idx, j]
            nrm2 = 0.0
            for j in range(m):
                nrm2 += w[j] * w[j]
            if nrm2 > radius2:
                scale = sqrt(radius2 / nrm2)
                for j in range(m):
                    w[j] *= scale
        for j in range(m):
            weights[c, j] = w[j]
    return out

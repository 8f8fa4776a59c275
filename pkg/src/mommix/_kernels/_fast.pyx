# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Same contracts as reference.py; plain C loops over
contiguous float64 memoryviews, no numpy C-API."""

from libc.math cimport exp, log, log1p, M_PI

import numpy as np


def moment_sums(double[::1] eta, double[::1] y, double[::1] w):
    cdef Py_ssize_t i, n = eta.shape[0]
    cdef double sw = 0.0, se = 0.0, se2 = 0.0, se3 = 0.0, se4 = 0.0
    cdef double sy2 = 0.0, sey2 = 0.0, se2y2 = 0.0
    cdef double wi, e, e2, y2, we, we2
    for i in range(n):
        wi = w[i]
        e = eta[i]
        e2 = e * e
        y2 = y[i] * y[i]
        we = wi * e
        we2 = wi * e2
        sw += wi
        se += we
        se2 += we2
        se3 += we * e2
        se4 += we2 * e2
        sy2 += wi * y2
        sey2 += we * y2
        se2y2 += we2 * y2
    cdef double inv = 1.0 / sw
    return (sw / n, se * inv, se2 * inv, se3 * inv, se4 * inv,
            sy2 * inv, sey2 * inv, se2y2 * inv)


def profile_moments(double[:, ::1] x, double[::1] y, double[::1] lam1):
    cdef Py_ssize_t i, j, n = x.shape[0], m = x.shape[1]
    cdef double sw = 0.0, se = 0.0, se2 = 0.0, se3 = 0.0, se4 = 0.0
    cdef double sy2 = 0.0, sey2 = 0.0, se2y2 = 0.0
    cdef double wi, e, e2, y2, we, we2
    for i in range(n):
        e = 0.0
        for j in range(m):
            e += x[i, j] * lam1[j]
        e2 = e * e
        wi = 1.0 / (1.0 + e2 * e2)
        y2 = y[i] * y[i]
        we = wi * e
        we2 = wi * e2
        sw += wi
        se += we
        se2 += we2
        se3 += we * e2
        se4 += we2 * e2
        sy2 += wi * y2
        sey2 += we * y2
        se2y2 += we2 * y2
    cdef double inv = 1.0 / sw
    return (sw / n, se * inv, se2 * inv, se3 * inv, se4 * inv,
            sy2 * inv, sey2 * inv, se2y2 * inv)


def em_estep(double[::1] y, double[::1] mean1, double var1,
             double mu2, double var2, double p):
    cdef Py_ssize_t i, n = y.shape[0]
    gamma = np.empty(n, dtype=np.float64)
    cdef double[::1] g = gamma
    cdef double c1 = log(p) - 0.5 * log(2.0 * M_PI * var1)
    cdef double c2 = log1p(-p) - 0.5 * log(2.0 * M_PI * var2)
    cdef double h1 = 0.5 / var1, h2 = 0.5 / var2
    cdef double d, la, lb, hi, s, ll = 0.0
    for i in range(n):
        d = y[i] - mean1[i]
        la = c1 - d * d * h1
        d = y[i] - mu2
        lb = c2 - d * d * h2
        hi = la if la > lb else lb
        s = hi + log(exp(la - hi) + exp(lb - hi))
        ll += s
        g[i] = exp(la - s)
    return gamma, ll

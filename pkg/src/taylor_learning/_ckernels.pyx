# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numerical kernels. Mirrors ``_pykernels`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport lgamma, log, log1p, exp, INFINITY

cnp.import_array()


def fornberg_weights(double z, x, int max_order):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    cdef int m = max_order
    out = np.zeros((n, m + 1), dtype=np.float64)
    cdef double[:, ::1] C = out
    cdef double c1, c2, c3, c4, c5
    cdef Py_ssize_t i, j
    cdef int k, mn
    C[0, 0] = 1.0
    c1 = 1.0
    c4 = xv[0] - z
    for i in range(1, n):
        mn = i if i < m else m
        c2 = 1.0
        c5 = c4
        c4 = xv[i] - z
        for j in range(i):
            c3 = xv[i] - xv[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    C[i, k] = c1 * (k * C[i - 1, k - 1] - c5 * C[i - 1, k]) / c2
                C[i, 0] = -c1 * c5 * C[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                C[j, k] = (c4 * C[j, k] - k * C[j, k - 1]) / c3
            C[j, 0] = c4 * C[j, 0] / c3
        c1 = c2
    return out


def horner(coeffs, double p, xs):
    cdef double[::1] c = np.ascontiguousarray(coeffs, dtype=np.float64)
    arr = np.ascontiguousarray(xs, dtype=np.float64)
    out = np.empty_like(arr)
    cdef double[::1] xv = arr.reshape(-1)
    cdef double[::1] ov = out.reshape(-1)
    cdef Py_ssize_t i, n = xv.shape[0]
    cdef Py_ssize_t j, nc = c.shape[0]
    cdef double u, acc
    for i in range(n):
        u = xv[i] - p
        acc = 0.0
        for j in range(nc - 1, -1, -1):
            acc = acc * u + c[j]
        ov[i] = acc
    return out


cdef double _log_term(long M, long j, double log_g, double log_1mg) nogil:
    cdef double lc = lgamma(M + 1.0) - lgamma(j + 1.0) - lgamma(M - j + 1.0)
    cdef double a = j * log_g if j > 0 else 0.0
    cdef double b = (M - j) * log_1mg if M - j > 0 else 0.0
    return lc + a + b


cdef double _cdf(long k, long M, double gamma):
    cdef double log_g, log_1mg, top, s, v
    cdef long j
    if k < 0:
        return 0.0
    if k >= M:
        return 1.0
    if gamma <= 0.0:
        return 1.0
    if gamma >= 1.0:
        return 0.0
    log_g = log(gamma)
    log_1mg = log1p(-gamma)
    top = -INFINITY
    for j in range(k + 1):
        v = _log_term(M, j, log_g, log_1mg)
        if v > top:
            top = v
    if top == -INFINITY:
        return 0.0
    # math.fsum in the Python twin; terms here are all <= 1 after shifting
    # and k is small, so plain summation agrees to a few ulps.
    s = 0.0
    for j in range(k + 1):
        s += exp(_log_term(M, j, log_g, log_1mg) - top)
    v = exp(top + log(s))
    return v if v < 1.0 else 1.0


def binom_cdf(long k, long M, double gamma):
    return _cdf(k, M, gamma)


def required_samples_search(double gamma, long m, double delta):
    cdef long lo, hi, mid
    if _cdf(m - 1, m, gamma) < delta:
        return m
    lo = m
    hi = 2 * m
    while _cdf(m - 1, hi, gamma) >= delta:
        lo = hi
        hi *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _cdf(m - 1, mid, gamma) < delta:
            hi = mid
        else:
            lo = mid
    return hi


def density_bisect(sorted_xs, long min_points, double rel_width):
    cdef double[::1] xs = np.ascontiguousarray(sorted_xs, dtype=np.float64)
    cdef double a = xs[0]
    cdef double b = xs[xs.shape[0] - 1]
    cdef Py_ssize_t lo_i = 0, hi_i = xs.shape[0], split, L, R, M
    cdef double width0 = b - a, mid
    cdef long depth = 0
    while hi_i - lo_i >= min_points and (b - a) >= rel_width * width0 and b > a:
        mid = a + (b - a) / 2.0
        # first index in [lo_i, hi_i) with xs > mid
        L = lo_i
        R = hi_i
        while L < R:
            M = (L + R) // 2
            if xs[M] <= mid:
                L = M + 1
            else:
                R = M
        split = L
        if split - lo_i >= hi_i - split:
            hi_i = split
            b = mid
        else:
            lo_i = split
            a = mid
        depth += 1
    return a, b, depth

"""Pure-Python versions of the numerical kernels.

Same signatures and semantics as the compiled ``_ckernels`` module; used when
the extension is not built or ``TAYLOR_LEARNING_PURE=1`` is set.
"""

import math

import numpy as np


def fornberg_weights(z, x, max_order):
    """Finite-difference weights for derivatives 0..max_order at ``z``.

    Returns an array of shape ``(len(x), max_order + 1)``; column ``k`` holds
    the weights of the k-th derivative.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    m = max_order
    C = np.zeros((n, m + 1))
    C[0, 0] = 1.0
    c1 = 1.0
    c4 = x[0] - z
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    C[i, k] = c1 * (k * C[i - 1, k - 1] - c5 * C[i - 1, k]) / c2
                C[i, 0] = -c1 * c5 * C[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                C[j, k] = (c4 * C[j, k] - k * C[j, k - 1]) / c3
            C[j, 0] = c4 * C[j, 0] / c3
        c1 = c2
    return C


def horner(coeffs, p, xs):
    """Evaluate sum_j coeffs[j] * (x - p)**j at every x in ``xs``."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    u = np.asarray(xs, dtype=np.float64) - p
    out = np.zeros_like(u)
    for c in coeffs[::-1]:
        out = out * u + c
    return out


def _log_binom_term(M, j, log_g, log_1mg):
    lc = math.lgamma(M + 1) - math.lgamma(j + 1) - math.lgamma(M - j + 1)
    a = j * log_g if j > 0 else 0.0
    b = (M - j) * log_1mg if M - j > 0 else 0.0
    return lc + a + b


def binom_cdf(k, M, gamma):
    """P(Binomial(M, gamma) <= k), summed term by term in log space."""
    if k < 0:
        return 0.0
    if k >= M:
        return 1.0
    if gamma <= 0.0:
        return 1.0
    if gamma >= 1.0:
        return 0.0
    log_g = math.log(gamma)
    log_1mg = math.log1p(-gamma)
    logs = [_log_binom_term(M, j, log_g, log_1mg) for j in range(k + 1)]
    top = max(logs)
    if top == -math.inf:
        return 0.0
    s = math.fsum(math.exp(v - top) for v in logs)
    return min(1.0, math.exp(top + math.log(s)))


def required_samples_search(gamma, m, delta):
    """Smallest M >= m with binom_cdf(m - 1, M, gamma) < delta.

    CDF(m-1; M, gamma) is nonincreasing in M, so a doubling bracket followed by
    bisection returns the same M as a unit-step upward scan.
    """
    if binom_cdf(m - 1, m, gamma) < delta:
        return m
    lo = m
    hi = 2 * m
    while binom_cdf(m - 1, hi, gamma) >= delta:
        lo = hi
        hi *= 2
    # invariant: cdf(lo) >= delta > cdf(hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if binom_cdf(m - 1, mid, gamma) < delta:
            hi = mid
        else:
            lo = mid
    return hi


def density_bisect(sorted_xs, min_points, rel_width):
    """Majority bisection on sorted samples; returns (left, right, depth)."""
    xs = np.asarray(sorted_xs, dtype=np.float64)
    a = float(xs[0])
    b = float(xs[-1])
    lo_i = 0
    hi_i = xs.shape[0]
    width0 = b - a
    depth = 0
    while hi_i - lo_i >= min_points and (b - a) >= rel_width * width0 and b > a:
        mid = a + (b - a) / 2.0
        # left half is [a, mid], right half is (mid, b]
        split = int(np.searchsorted(xs[lo_i:hi_i], mid, side="right")) + lo_i
        n_left = split - lo_i
        n_right = hi_i - split
        if n_left >= n_right:
            hi_i = split
            b = mid
        else:
            lo_i = split
            a = mid
        depth += 1
    return a, b, depth

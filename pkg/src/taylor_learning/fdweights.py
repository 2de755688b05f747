"""Finite-difference weights on arbitrary distinct nodes.

The weights ``a_j`` for the n-th derivative at ``p`` are the unique solution
of the moment system ``sum_j a_j (x_j - p)^m = n! [m == n]``, m = 0..k.
Nodes are centred at ``p`` and scaled by ``s = max|x_j - p|`` before solving;
the scaled weights are divided by ``s**n`` afterwards.

Two backends:

``float``
    Fornberg's recursion on the scaled nodes (compiled kernel when built).
    It returns every order 0..n from one pass and is far better behaved
    than forming and factoring the Vandermonde matrix.
``exact``
    Gauss-Jordan elimination of the moment system in rational arithmetic.
    Float inputs are converted exactly, so this is the ground truth the
    float path is checked against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .errors import DegenerateStencilError, InsufficientNodesError

DUPLICATE_TOL = 1e-12


@dataclass(frozen=True)
class WeightTable:
    nodes: tuple
    order: int
    point: float
    weights: tuple
    condition_estimate: float
    scale: float
    spread_ratio: float

    def apply(self, values):
        """Weighted sum of function values taken at ``nodes``."""
        if isinstance(self.weights[0], Fraction):
            return sum(w * Fraction(v) for w, v in zip(self.weights, values))
        return float(np.dot(np.asarray(self.weights, dtype=float), np.asarray(values, float)))


def _check(nodes, n):
    if n < 0 or int(n) != n:
        raise InsufficientNodesError(f"derivative order must be a nonnegative integer, got {n!r}")
    if len(nodes) == 0:
        raise InsufficientNodesError("no nodes given")
    if n > len(nodes) - 1:
        raise InsufficientNodesError(
            f"order {n} needs at least {n + 1} nodes, got {len(nodes)}"
        )


def _scaled(nodes, p):
    h = np.asarray(nodes, dtype=np.float64) - p
    s = float(np.max(np.abs(h)))
    if s == 0.0:
        s = 1.0
    u = h / s
    if len(u) > 1:
        gaps = np.diff(np.sort(u))
        if np.min(gaps) < DUPLICATE_TOL:
            raise DegenerateStencilError(
                f"nodes closer than {DUPLICATE_TOL:g} relative spread; duplicates are not allowed"
            )
    return u, s


def moment_matrix(u):
    """Rows m = 0..k of u_j**m."""
    u = np.asarray(u, dtype=np.float64)
    return np.vander(u, len(u), increasing=True).T


def condition_estimate(u, all_weights=None):
    """Infinity-norm condition number of the scaled moment matrix.

    ``all_weights`` (the Fornberg table for every order up to k) already holds
    the inverse up to column factors m!, so no extra factorisation is needed.
    """
    V = moment_matrix(u)
    k = len(u) - 1
    if all_weights is None or all_weights.shape[1] != k + 1:
        all_weights = kernels.fornberg_weights(0.0, u, k)
    fact = np.array([math.factorial(m) for m in range(k + 1)], dtype=float)
    inv = all_weights / fact[None, :]
    return max(1.0, float(np.linalg.norm(V, np.inf) * np.linalg.norm(inv, np.inf)))


def _spread_ratio(u):
    # ratio of the node spread to the distance of the farthest node from p;
    # this is the constant C of sup|h_j - h_i| <= C h with h = max|h_j|
    return float(np.max(u) - np.min(u))


def stencil(nodes, max_order, p=0.0):
    """Float weights for every order 0..max_order; returns (weights[k+1, n+1], scale, cond)."""
    _check(nodes, max_order)
    u, s = _scaled(nodes, p)
    k = len(u) - 1
    full = kernels.fornberg_weights(0.0, u, k)
    cond = condition_estimate(u, full)
    orders = np.arange(max_order + 1)
    w = full[:, : max_order + 1] / s ** orders[None, :]
    return w, s, cond


def fd_weights(nodes, n, p=0.0, exact=False) -> WeightTable:
    """Weights of the n-th derivative at ``p`` from values at ``nodes``."""
    _check(nodes, n)
    if exact:
        return _fd_weights_exact(nodes, n, p)
    u, s = _scaled(nodes, p)
    k = len(u) - 1
    full = kernels.fornberg_weights(0.0, u, k)
    cond = condition_estimate(u, full)
    w = full[:, n] / s**n
    return WeightTable(
        nodes=tuple(float(x) for x in nodes),
        order=int(n),
        point=float(p),
        weights=tuple(float(v) for v in w),
        condition_estimate=cond,
        scale=s,
        spread_ratio=_spread_ratio(u),
    )


def _to_fraction(v):
    return v if isinstance(v, Fraction) else Fraction(v)


def solve_exact(A, b):
    """Gauss-Jordan with partial pivoting on Fractions; A is a list of rows."""
    n = len(A)
    M = [list(row) + [rhs] for row, rhs in zip(A, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            raise DegenerateStencilError("moment system is singular")
        M[col], M[piv] = M[piv], M[col]
        pv = M[col][col]
        M[col] = [v / pv for v in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * b_ for a, b_ in zip(M[r], M[col])]
    return [M[r][n] for r in range(n)]


def _fd_weights_exact(nodes, n, p):
    xs = [_to_fraction(x) for x in nodes]
    pf = _to_fraction(p)
    h = [x - pf for x in xs]
    s = max(abs(v) for v in h) or Fraction(1)
    u = [v / s for v in h]
    su = sorted(u)
    if any(b - a < Fraction(DUPLICATE_TOL) for a, b in zip(su, su[1:])):
        raise DegenerateStencilError("duplicate nodes in exact stencil")
    k = len(u) - 1
    A = [[uj**m for uj in u] for m in range(k + 1)]
    rhs = [Fraction(math.factorial(n)) if m == n else Fraction(0) for m in range(k + 1)]
    a = solve_exact(A, rhs)
    w = tuple(v / s**n for v in a)
    uf = np.array([float(v) for v in u])
    return WeightTable(
        nodes=tuple(xs),
        order=int(n),
        point=pf,
        weights=w,
        condition_estimate=condition_estimate(uf),
        scale=s,
        spread_ratio=_spread_ratio(uf),
    )


def estimate_derivative(data, n, p=0.0, exact=False):
    """Sum of weights times labels over the dataset's nodes."""
    table = fd_weights(data.x, n, p, exact=exact)
    return table.apply(data.y)


def accuracy_order(node_count, n):
    """Formal accuracy order ``node_count - n`` of a well-spread stencil."""
    if node_count <= n:
        raise InsufficientNodesError(f"{node_count} nodes cannot resolve order {n}")
    return node_count - n

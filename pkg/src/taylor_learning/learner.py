"""Taylor learner: density point, node selection, stencil derivatives, polynomial model."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .errors import (
    ConfigError,
    DegenerateStencilError,
    InsufficientDataError,
    NoGuaranteeError,
)
from .fdweights import DUPLICATE_TOL, stencil

BISECT_MIN_POINTS = 8
BISECT_REL_WIDTH = 1e-9


@dataclass(frozen=True)
class LearnerConfig:
    N: int = 3
    m_per_order: int | None = None
    h_max: float = 1.0
    h_shrink: float = 0.5
    cond_max: float = 1e10
    p_override: float | None = None
    selection: str = "spread"

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 0:
            raise ConfigError(f"N must be a nonnegative integer, got {self.N!r}")
        if self.m_per_order is None:
            object.__setattr__(self, "m_per_order", self.N + 2)
        if self.m_per_order < self.N + 1:
            raise ConfigError("m_per_order must be at least N + 1")
        if not 0 < self.h_shrink < 1:
            raise ConfigError("h_shrink must lie in (0, 1)")
        if not self.h_max > 0:
            raise ConfigError("h_max must be positive")
        if self.selection not in ("spread", "nearest"):
            raise ConfigError("selection must be 'spread' or 'nearest'")

    @classmethod
    def from_dict(cls, d):
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown learner keys: {sorted(extra)}")
        return cls(**d)

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class OrderDiagnostics:
    order: int
    window: float
    nodes: int
    condition: float
    passed: bool


@dataclass(frozen=True)
class PolynomialModel:
    """y(x) = sum_j coefficients[j] * (x - expansion_point)**j."""

    expansion_point: float
    coefficients: tuple
    diagnostics: tuple = field(default=(), compare=False)

    @property
    def degree(self):
        return len(self.coefficients) - 1

    def __call__(self, x):
        out = kernels.horner(self.coefficients, self.expansion_point, np.atleast_1d(x))
        return float(out[0]) if np.ndim(x) == 0 else out

    def derivatives(self):
        return tuple(c * math.factorial(j) for j, c in enumerate(self.coefficients))


def find_density_point(xs) -> float:
    """Midpoint of the last interval of a majority bisection of the sample.

    Starting from [min, max], keep the half with at least as many points as
    the other (left on ties) until fewer than 8 points remain or the width
    drops below 1e-9 of the start. Depends only on the multiset of values.
    """
    xs = np.asarray(xs, dtype=np.float64).reshape(-1)
    if xs.size == 0:
        raise ConfigError("find_density_point needs at least one sample")
    if not np.all(np.isfinite(xs)):
        raise ConfigError("samples must be finite")
    a, b, _ = kernels.density_bisect(np.sort(xs), BISECT_MIN_POINTS, BISECT_REL_WIDTH)
    return a + (b - a) / 2.0


def density_interval(xs):
    """(left, right, depth) of the final bisection interval."""
    xs = np.sort(np.asarray(xs, dtype=np.float64).reshape(-1))
    return kernels.density_bisect(xs, BISECT_MIN_POINTS, BISECT_REL_WIDTH)


def _exact_cdf(k, M, gamma):
    g = Fraction(gamma)
    q = 1 - g
    return sum(math.comb(M, j) * q ** (M - j) * g**j for j in range(k + 1))


def binomial_cdf(k, M, gamma):
    return kernels.binom_cdf(int(k), int(M), float(gamma))


def required_samples(gamma, m, delta) -> int:
    """Smallest M with P(Binomial(M, gamma) <= m - 1) < delta.

    Bracketing runs in float log space; when the CDF at the answer or its
    predecessor sits within 1e-9 of ``delta``, the comparison is redone in
    exact rational arithmetic.
    """
    if not 0 < delta < 1:
        raise ConfigError("delta must lie in (0, 1)")
    if int(m) != m or m < 1:
        raise ConfigError("m must be a positive integer")
    if not gamma > 0:
        raise NoGuaranteeError("window probability is zero; no sample size suffices")
    if gamma > 1:
        raise ConfigError("gamma is a probability")
    m = int(m)
    M = int(kernels.required_samples_search(float(gamma), m, float(delta)))

    def below(Mq):
        if Mq < m:
            return False
        v = binomial_cdf(m - 1, Mq, gamma)
        if abs(v - delta) <= 1e-9 * delta:
            return _exact_cdf(m - 1, Mq, gamma) < Fraction(delta)
        return v < delta

    while not below(M):
        M += 1
    while M - 1 >= m and below(M - 1):
        M -= 1
    return M


@dataclass(frozen=True)
class NodeSelection:
    nodes: tuple
    indices: tuple
    requested: int

    @property
    def shortfall(self):
        return max(0, self.requested - len(self.nodes))

    @property
    def complete(self):
        return self.shortfall == 0


def _in_window(xs, p, h):
    return np.nonzero(np.abs(xs - p) < h)[0]


def select_nodes(xs, p, m, h, strategy="nearest") -> NodeSelection:
    """Up to m distinct points of xs inside the open window (p - h, p + h).

    ``nearest`` takes the points closest to p; ``spread`` takes, for each of m
    Chebyshev targets across the occupied part of the window, the closest
    unused point. Values closer than 1e-12 * h to an already chosen node
    count as duplicates.
    A short result is reported through ``shortfall``.
    """
    if m < 1:
        raise ConfigError("m must be at least 1")
    xs = np.asarray(xs, dtype=np.float64).reshape(-1)
    idx = _in_window(xs, p, h)
    tol = DUPLICATE_TOL * h
    # deterministic order: distance to p, then value, then index
    order = np.lexsort((idx, xs[idx], np.abs(xs[idx] - p)))
    idx = idx[order]
    if strategy == "nearest":
        chosen: list[int] = []
        kept = np.empty(0)
        for i in idx:
            if len(chosen) == m:
                break
            if kept.size and np.min(np.abs(kept - xs[i])) < tol:
                continue
            chosen.append(int(i))
            kept = np.append(kept, xs[i])
    elif strategy == "spread":
        chosen = _spread_pick(xs, idx, p, m, h, tol)
    else:
        raise ConfigError(f"unknown selection strategy {strategy!r}")
    return NodeSelection(tuple(float(xs[i]) for i in chosen), tuple(chosen), int(m))


def _spread_pick(xs, idx, p, m, h, tol):
    if idx.size == 0:
        return []
    # distinct candidate values, sorted
    vals = xs[idx]
    order = np.argsort(vals, kind="stable")
    vals = vals[order]
    cand_idx = idx[order]
    keep = np.ones(vals.size, dtype=bool)
    keep[1:] = np.diff(vals) >= tol
    vals = vals[keep]
    cand_idx = cand_idx[keep]
    if vals.size <= m:
        sel = np.argsort(np.abs(vals - p), kind="stable")
        return [int(cand_idx[i]) for i in sel]
    # targets span the occupied part of the window; near a support edge the
    # empty side would otherwise pull several targets onto the same few points
    a, b = max(p - h, vals[0]), min(p + h, vals[-1])
    targets = (a + b) / 2 + (b - a) / 2 * np.cos(np.pi * (np.arange(m) + 0.5) / m)
    taken = np.zeros(vals.size, dtype=bool)
    chosen = []
    # fill targets nearest to p first so the centre of the stencil is dense
    for t in targets[np.argsort(np.abs(targets - p), kind="stable")]:
        j = int(np.searchsorted(vals, t))
        best = None
        lo, hi = j - 1, j
        while lo >= 0 and taken[lo]:
            lo -= 1
        while hi < vals.size and taken[hi]:
            hi += 1
        if lo >= 0:
            best = lo
        if hi < vals.size and (best is None or abs(vals[hi] - t) < abs(vals[best] - t)):
            best = hi
        taken[best] = True
        chosen.append(int(cand_idx[best]))
    chosen.sort(key=lambda i: (abs(xs[i] - p), xs[i]))
    return chosen


def fit(data, cfg: LearnerConfig | dict | None = None) -> PolynomialModel:
    """Polynomial model from stencil estimates of derivatives 0..N at a density point.

    One node set, chosen in (p - h_max, p + h_max), serves every order; N = 0
    uses the single nearest node. If an order's stencil is worse conditioned
    than ``cond_max`` the window shrinks by ``h_shrink`` and that order is
    re-estimated on the smaller node set, until it passes or fewer than
    order + 1 nodes remain.
    """
    if cfg is None:
        cfg = LearnerConfig()
    elif isinstance(cfg, dict):
        cfg = LearnerConfig.from_dict(cfg)
    xs = np.asarray(data.x, dtype=np.float64)
    ys = np.asarray(data.y, dtype=np.float64)
    if xs.size == 0:
        raise ConfigError("cannot fit an empty dataset")
    N = cfg.N
    distinct = np.unique(xs).size
    if distinct < N + 1:
        raise InsufficientDataError(
            f"{distinct} distinct sample values; degree {N} needs {N + 1}",
            {j: max(0, j + 1 - distinct) for j in range(N + 1)},
        )
    p = float(cfg.p_override) if cfg.p_override is not None else find_density_point(xs)

    h = cfg.h_max
    if N == 0:
        # a constant model is the value at the nearest node (1-node stencil)
        sel = select_nodes(xs, p, 1, h, "nearest")
    else:
        sel = select_nodes(xs, p, cfg.m_per_order, h, cfg.selection)
    if len(sel.nodes) < N + 1:
        raise InsufficientDataError(
            f"window (p - {h:g}, p + {h:g}) holds {len(sel.nodes)} distinct points; "
            f"degree {N} needs {N + 1}",
            {j: max(0, j + 1 - len(sel.nodes)) for j in range(N + 1)},
        )
    W, _, cond = _stencil(sel, N, p)

    derivs = []
    diags = []
    for j in range(N + 1):
        if cond <= cfg.cond_max:
            derivs.append(float(W[:, j] @ ys[list(sel.indices)]))
            diags.append(OrderDiagnostics(j, h, len(sel.nodes), cond, True))
            continue
        d_j, diag = _shrink_for_order(xs, ys, p, j, cfg, W, sel, cond)
        derivs.append(d_j)
        diags.append(diag)
    coeffs = tuple(d / math.factorial(j) for j, d in enumerate(derivs))
    return PolynomialModel(p, coeffs, tuple(diags))


def _stencil(sel, max_order, p):
    try:
        return stencil(sel.nodes, min(max_order, len(sel.nodes) - 1), p)
    except DegenerateStencilError:
        # selection dedups at 1e-12*h; a tighter stencil scale can still trip
        raise InsufficientDataError("selected nodes are numerically coincident") from None


def _shrink_for_order(xs, ys, p, j, cfg, W0, sel0, cond0):
    """Re-estimate order j on shrinking windows; keep the last passing estimate.

    Falls back to the full-window estimate (flagged as not passing) when no
    smaller window passes the conditioning gate.
    """
    best = (float(W0[:, j] @ ys[list(sel0.indices)]),
            OrderDiagnostics(j, cfg.h_max, len(sel0.nodes), cond0, False))
    h = cfg.h_max
    while True:
        h *= cfg.h_shrink
        sel = select_nodes(xs, p, cfg.m_per_order, h, cfg.selection)
        if len(sel.nodes) < j + 1:
            return best
        W, _, cond = _stencil(sel, j, p)
        if cond <= cfg.cond_max:
            return (float(W[:, j] @ ys[list(sel.indices)]),
                    OrderDiagnostics(j, h, len(sel.nodes), cond, True))

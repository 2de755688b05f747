"""Sampleable marginals on R with certified subgaussian constants.

A constant ``c`` is certified when ``P(|x| > T) <= exp(-c T^2)`` holds for
every ``T >= 0``. Families that only admit an empirical estimate (heavy tails,
mass bounded away from the origin) raise :class:`CapabilityError` from
:func:`subgaussian_constant`; :func:`estimate_subgaussian_constant` gives an
explicitly uncertified fit for exploratory runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy import special, stats

from .errors import CapabilityError, ConfigError, RegistryError

C_MAX = 1e6


def _seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if isinstance(seed, (tuple, list)):
        return np.random.SeedSequence([int(s) for s in seed])
    return np.random.SeedSequence(int(seed))


def _child(ss: np.random.SeedSequence, k: int) -> np.random.SeedSequence:
    # like ss.spawn, but without mutating ss
    return np.random.SeedSequence(ss.entropy, spawn_key=tuple(ss.spawn_key) + (k,))


class DistributionSpec:
    """Base class. Subclasses fill in the family-specific pieces."""

    name = "abstract"

    @property
    def params(self) -> dict:
        raise NotImplementedError

    def config(self) -> dict:
        return {"dist": self.name, **self.params}

    def draw(self, ss: np.random.SeedSequence, count: int) -> np.ndarray:
        raise NotImplementedError

    # pieces used by quadrature and the certifier
    def pdf(self, x):
        """Density of the continuous part (zero for pure atoms)."""
        return np.zeros_like(np.asarray(x, dtype=float))

    def atoms(self) -> list[tuple[float, float]]:
        return []

    def support(self) -> tuple[float, float]:
        return (-math.inf, math.inf)

    def tail(self, T):
        """Exact P(|x| > T)."""
        raise NotImplementedError

    def certified_c(self) -> float:
        raise CapabilityError(f"{self.name} has no certified subgaussian constant")

    @property
    def c(self) -> float:
        return self.certified_c()

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{self.name}({args})"

    def __eq__(self, other):
        return isinstance(other, DistributionSpec) and self.config() == other.config()

    def __hash__(self):
        return hash(repr(self))


class Uniform(DistributionSpec):
    name = "uniform"

    def __init__(self, a=0.0, b=1.0):
        a, b = float(a), float(b)
        if not (a < b) or not (math.isfinite(a) and math.isfinite(b)):
            raise ConfigError(f"uniform needs finite a < b, got a={a}, b={b}")
        self.a, self.b = a, b

    @property
    def params(self):
        return {"a": self.a, "b": self.b}

    def draw(self, ss, count):
        return np.random.Generator(np.random.PCG64(ss)).uniform(self.a, self.b, count)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= self.a) & (x <= self.b), 1.0 / (self.b - self.a), 0.0)

    def support(self):
        return (self.a, self.b)

    def tail(self, T):
        T = np.asarray(T, dtype=float)
        inside = np.clip(np.minimum(T, self.b) - np.maximum(-T, self.a), 0.0, None)
        return 1.0 - inside / (self.b - self.a)

    def certified_c(self):
        # With 0 in [a, b] and B = max(|a|, |b|): P(|x| <= T) >= T/(2B), so
        # P(|x| > T) <= 1 - T/(2B) <= exp(-T/(2B)) <= exp(-T^2/(2B^2)) on [0, B].
        if self.a > 0 or self.b < 0:
            raise CapabilityError(
                f"uniform[{self.a}, {self.b}] keeps mass away from 0; no c satisfies "
                "P(|x|>T) <= exp(-cT^2) near T = 0"
            )
        B = max(abs(self.a), abs(self.b))
        return 1.0 / (2.0 * B * B)


class Gaussian(DistributionSpec):
    name = "gaussian"

    def __init__(self, sigma=1.0, mu=0.0):
        sigma, mu = float(sigma), float(mu)
        if not sigma > 0:
            raise ConfigError(f"gaussian needs sigma > 0, got {sigma}")
        self.sigma, self.mu = sigma, mu

    @property
    def params(self):
        return {"sigma": self.sigma} if self.mu == 0.0 else {"sigma": self.sigma, "mu": self.mu}

    def draw(self, ss, count):
        return np.random.Generator(np.random.PCG64(ss)).normal(self.mu, self.sigma, count)

    def pdf(self, x):
        return stats.norm.pdf(x, loc=self.mu, scale=self.sigma)

    def tail(self, T):
        T = np.asarray(T, dtype=float)
        s = self.sigma
        return stats.norm.sf((T - self.mu) / s) + stats.norm.cdf((-T - self.mu) / s)

    def certified_c(self):
        if self.mu != 0.0:
            raise CapabilityError("only centered gaussians carry a certificate")
        # 2 Q(t) <= exp(-t^2/2) <= exp(-t^2/4), t = T/sigma
        return 1.0 / (4.0 * self.sigma**2)


class TruncatedGaussian(DistributionSpec):
    """Centered gaussian conditioned on |x| <= bound."""

    name = "truncated_gaussian"

    def __init__(self, sigma=1.0, bound=1.0):
        sigma, bound = float(sigma), float(bound)
        if not (sigma > 0 and bound > 0):
            raise ConfigError("truncated_gaussian needs sigma > 0 and bound > 0")
        self.sigma, self.bound = sigma, bound
        self._z = 2.0 * stats.norm.cdf(bound / sigma) - 1.0

    @property
    def params(self):
        return {"sigma": self.sigma, "bound": self.bound}

    def draw(self, ss, count):
        u = np.random.Generator(np.random.PCG64(ss)).random(count)
        lo = special.ndtr(-self.bound / self.sigma)
        return self.sigma * special.ndtri(lo + u * self._z)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        d = stats.norm.pdf(x, scale=self.sigma) / self._z
        return np.where(np.abs(x) <= self.bound, d, 0.0)

    def support(self):
        return (-self.bound, self.bound)

    def tail(self, T):
        T = np.asarray(T, dtype=float)
        inner = 2.0 * stats.norm.cdf(np.minimum(T, self.bound) / self.sigma) - 1.0
        return np.clip(1.0 - inner / self._z, 0.0, 1.0)

    def certified_c(self):
        # conditioning on |x| <= B never raises P(|x| > T); the density is
        # decreasing in |x|, so P(|x| <= T) >= T/B as for a uniform on [-B, B]
        return max(1.0 / (4.0 * self.sigma**2), 1.0 / (2.0 * self.bound**2))


class PointMass(DistributionSpec):
    name = "point_mass"

    def __init__(self, at=0.0):
        self.at = float(at)
        if not math.isfinite(self.at):
            raise ConfigError("point mass location must be finite")

    @property
    def params(self):
        return {"at": self.at}

    def draw(self, ss, count):
        return np.full(count, self.at)

    def atoms(self):
        return [(self.at, 1.0)]

    def support(self):
        return (self.at, self.at)

    def tail(self, T):
        return np.where(np.asarray(T, dtype=float) < abs(self.at), 1.0, 0.0)

    def certified_c(self):
        if self.at == 0.0:
            return C_MAX
        raise CapabilityError(
            f"point mass at {self.at} has P(|x|>T) = 1 for T < {abs(self.at)}; no c works"
        )


class Mixture(DistributionSpec):
    name = "mixture"

    def __init__(self, components: Sequence[DistributionSpec], weights: Sequence[float]):
        if len(components) == 0 or len(components) != len(weights):
            raise ConfigError("mixture needs matching non-empty components and weights")
        w = np.asarray(weights, dtype=float)
        if np.any(w < 0) or not w.sum() > 0:
            raise ConfigError("mixture weights must be nonnegative with positive sum")
        self.components = list(components)
        self.weights = w / w.sum()

    @property
    def params(self):
        return {
            "components": [c.config() for c in self.components],
            "weights": [float(v) for v in self.weights],
        }

    def draw(self, ss, count):
        # component labels and each component's values come from separate child
        # streams, so a longer draw extends a shorter one without changing it
        children = [_child(ss, k) for k in range(len(self.components) + 1)]
        u = np.random.Generator(np.random.PCG64(children[0])).random(count)
        label = np.searchsorted(np.cumsum(self.weights)[:-1], u, side="right")
        out = np.empty(count)
        for k, comp in enumerate(self.components):
            mask = label == k
            n_k = int(mask.sum())
            if n_k:
                out[mask] = comp.draw(children[k + 1], n_k)
        return out

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return sum(w * c.pdf(x) for w, c in zip(self.weights, self.components))

    def atoms(self):
        merged: dict[float, float] = {}
        for w, c in zip(self.weights, self.components):
            for loc, aw in c.atoms():
                merged[loc] = merged.get(loc, 0.0) + w * aw
        return sorted(merged.items())

    def support(self):
        lo = min(c.support()[0] for c in self.components)
        hi = max(c.support()[1] for c in self.components)
        return (lo, hi)

    def tail(self, T):
        return sum(w * c.tail(T) for w, c in zip(self.weights, self.components))

    def certified_c(self):
        return _certify_mixture(self.components, self.weights)


def _certify_mixture(components, weights, grid_points=4000) -> float:
    """Rigorous c for a mixture, allowing atoms away from the origin.

    Each certified component is replaced by its envelope exp(-c_i T^2); an atom
    at a != 0 by the step 1[T < |a|]. With E(T) the weighted envelope sum we
    need c <= -log E(T) / T^2 for all T > 0, bounded piecewise:

    * T <= T1: exp(-u) <= 1 - u + u^2/2 gives -log E >= T^2 sum w_i c_i (1 - c_i T1^2 / 2);
    * T in [T_k, T_{k+1}]: E nonincreasing, so -log E(T)/T^2 >= -log E(T_k) / T_{k+1}^2;
    * T >= T_max (past every atom): E <= exp(-min c_i T^2).
    """
    cert_w, cert_c, steps = [], [], []
    for w, comp in zip(weights, components):
        if w == 0:
            continue
        if isinstance(comp, PointMass) and comp.at != 0.0:
            steps.append((abs(comp.at), w))
            continue
        try:
            ci = comp.certified_c()
        except CapabilityError as exc:
            raise CapabilityError(f"mixture component {comp!r} is uncertified: {exc}") from None
        cert_w.append(w)
        cert_c.append(ci)
    if not cert_w:
        raise CapabilityError("mixture has no certified mass near the origin")
    cert_w = np.asarray(cert_w)
    cert_c = np.asarray(cert_c)
    c_tail = float(cert_c.min())
    if not steps:
        return c_tail

    a_min = min(a for a, _ in steps)
    a_max = max(a for a, _ in steps)
    T1 = min(1e-3 / math.sqrt(cert_c.max()), 1e-3 * a_min)
    L0 = float(np.sum(cert_w * cert_c * (1.0 - cert_c * T1**2 / 2.0)))
    T_max = max(a_max, 10.0 / math.sqrt(c_tail)) * 1.01
    grid = np.geomspace(T1, T_max, grid_points)
    grid = np.unique(np.concatenate([grid, [a for a, _ in steps]]))

    def envelope(T):
        e = np.sum(cert_w[:, None] * np.exp(-cert_c[:, None] * T[None, :] ** 2), axis=0)
        for a, w in steps:
            e = e + np.where(T < a, w, 0.0)
        return np.minimum(e, 1.0)

    E = envelope(grid[:-1])
    with np.errstate(divide="ignore"):
        h = -np.log(E) / grid[1:] ** 2
    c = min(L0, float(np.min(h)), c_tail)
    if not c > 0:
        raise CapabilityError("mixture tail admits no positive subgaussian constant")
    return c * (1.0 - 1e-9)


class Cauchy(DistributionSpec):
    name = "cauchy"

    def __init__(self, scale=1.0):
        self.scale = float(scale)
        if not self.scale > 0:
            raise ConfigError("cauchy needs scale > 0")

    @property
    def params(self):
        return {"scale": self.scale}

    def draw(self, ss, count):
        return self.scale * np.random.Generator(np.random.PCG64(ss)).standard_cauchy(count)

    def pdf(self, x):
        return stats.cauchy.pdf(x, scale=self.scale)

    def tail(self, T):
        return 2.0 * stats.cauchy.sf(np.asarray(T, dtype=float), scale=self.scale)


class StudentT(DistributionSpec):
    name = "student_t"

    def __init__(self, df=3.0):
        self.df = float(df)
        if not self.df > 0:
            raise ConfigError("student_t needs df > 0")

    @property
    def params(self):
        return {"df": self.df}

    def draw(self, ss, count):
        return np.random.Generator(np.random.PCG64(ss)).standard_t(self.df, count)

    def pdf(self, x):
        return stats.t.pdf(x, self.df)

    def tail(self, T):
        return 2.0 * stats.t.sf(np.asarray(T, dtype=float), self.df)


FAMILIES = {
    "uniform": Uniform,
    "gaussian": Gaussian,
    "truncated_gaussian": TruncatedGaussian,
    "point_mass": PointMass,
    "cauchy": Cauchy,
    "student_t": StudentT,
}


def make_distribution(cfg: Any) -> DistributionSpec:
    """Build a distribution from a config dict such as ``{"dist": "gaussian", "sigma": 1}``."""
    if isinstance(cfg, DistributionSpec):
        return cfg
    if isinstance(cfg, str):
        cfg = {"dist": cfg}
    if not isinstance(cfg, dict) or "dist" not in cfg:
        raise ConfigError(f"distribution config needs a 'dist' key: {cfg!r}")
    name = cfg["dist"]
    params = {k: v for k, v in cfg.items() if k != "dist"}
    if name == "mixture":
        comps = [make_distribution(c) for c in params.get("components", [])]
        return Mixture(comps, params.get("weights", [1.0] * len(comps)))
    if name not in FAMILIES:
        raise RegistryError(f"unknown distribution {name!r}")
    try:
        return FAMILIES[name](**params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {name!r}: {exc}") from None


def sample(d, seed, count: int) -> np.ndarray:
    """``count`` i.i.d. draws; a pure function of (d, seed, count).

    ``sample(d, s, n)`` is a prefix of ``sample(d, s, m)`` for n <= m.
    """
    d = make_distribution(d)
    if int(count) != count or count < 1:
        raise ConfigError(f"count must be a positive integer, got {count!r}")
    return np.asarray(d.draw(_seed_sequence(seed), int(count)), dtype=np.float64)


def subgaussian_constant(d) -> float:
    return make_distribution(d).certified_c()


@dataclass(frozen=True)
class SubgaussianEstimate:
    c: float
    certified: bool = False
    n: int = 0


def estimate_subgaussian_constant(d, seed=0, n=100_000) -> SubgaussianEstimate:
    """Empirical c from the sample tail; never certified.

    Takes the minimum of -log(freq(|x|>T)) / T^2 over sample quantiles with at
    least 10 exceedances.
    """
    xs = np.sort(np.abs(sample(d, seed, n)))
    ks = np.arange(10, n, max(1, n // 1000))
    T = xs[n - ks - 1]
    ok = T > 0
    if not np.any(ok):
        return SubgaussianEstimate(C_MAX, False, n)
    freq = ks[ok] / n
    c = float(np.min(-np.log(freq) / T[ok] ** 2))
    return SubgaussianEstimate(c, False, n)


@dataclass(frozen=True)
class TailCheckRow:
    T: float
    frequency: float
    bound: float
    slack: float
    passed: bool


def empirical_tail_check(d, seed, n: int, T_grid) -> list[TailCheckRow]:
    """Compare the empirical frequency of |x| > T with exp(-c T^2)."""
    d = make_distribution(d)
    if n < 1000:
        raise ConfigError("empirical_tail_check needs n >= 1000")
    c = d.certified_c()
    ax = np.abs(sample(d, seed, n))
    rows = []
    for T in T_grid:
        freq = float(np.mean(ax > T))
        bound = math.exp(-c * T * T)
        slack = 3.0 * math.sqrt(bound * (1.0 - bound) / n) + 3.0 / n
        rows.append(TailCheckRow(float(T), freq, bound, slack, freq <= bound + slack))
    return rows


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Noiseless labelled sample: y[i] = f(x[i]) exactly."""

    x: np.ndarray
    y: np.ndarray
    seed: Any = None
    fn_name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.x.shape != self.y.shape or self.x.ndim != 1:
            raise ConfigError("x and y must be 1-d arrays of equal length")

    def __len__(self):
        return self.x.shape[0]

    @property
    def points(self):
        return list(zip(self.x.tolist(), self.y.tolist()))

    def subset(self, idx):
        idx = np.asarray(idx, dtype=int)
        return LabeledDataset(self.x[idx], self.y[idx], self.seed, self.fn_name, dict(self.meta))


def label(f, xs, seed=None) -> LabeledDataset:
    from .analytic import make_function

    f = make_function(f, allow_counterexamples=True)
    x = np.array(xs, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(x)):
        raise ConfigError("sample points must be finite")
    return LabeledDataset(x, np.asarray(f.eval(x), dtype=np.float64), seed, f.name,
                          {"fn": f.config()})

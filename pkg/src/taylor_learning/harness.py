"""Trials, success frequencies, sample-complexity search and convergence sweeps.

Every random draw comes from the base seed of the config: trial i uses the
seed ``base ^ i``, with stream 0 for training data and stream 1 for the
independent test set. Because draws are prefix-stable, trial i at a larger M
sees the same first points as at a smaller M.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy import stats

from .analytic import make_function, taylor_polynomial
from .dist import label, make_distribution, sample
from .errors import ConfigError, InsufficientDataError, NonconvergenceError
from .io import config_hash, model_digest
from .learner import LearnerConfig, fit

M_MAX = 2**20
TEST_SIZE = 100_000


@dataclass(frozen=True)
class TrialConfig:
    fn: dict
    dist: dict
    learner: LearnerConfig = field(default_factory=LearnerConfig)
    eps: float = 0.05
    delta: float = 0.1
    M: int = 1000
    trials: int = 50
    seed: int = 0
    test_size: int = TEST_SIZE
    allow_counterexamples: bool = False

    def __post_init__(self):
        if isinstance(self.fn, str):
            object.__setattr__(self, "fn", {"fn": self.fn})
        if isinstance(self.dist, str):
            object.__setattr__(self, "dist", {"dist": self.dist})
        if isinstance(self.learner, dict):
            object.__setattr__(self, "learner", LearnerConfig.from_dict(self.learner))
        if not self.eps >= 0:
            raise ConfigError("eps must be nonnegative")
        if not 0 < self.delta < 1:
            raise ConfigError("delta must lie in (0, 1)")
        if int(self.trials) != self.trials or self.trials < 1:
            raise ConfigError("trials must be a positive integer")
        if int(self.M) != self.M or self.M < 1:
            raise ConfigError("M must be a positive integer")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        if self.test_size < 1:
            raise ConfigError("test_size must be positive")
        # fail early on unknown names
        make_function(self.fn, self.allow_counterexamples)
        make_distribution(self.dist)

    @classmethod
    def from_dict(cls, d):
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown trial config keys: {sorted(extra)}")
        return cls(**d)

    def to_dict(self):
        out = asdict(self)
        out["learner"] = self.learner.to_dict()
        return out

    @property
    def hash(self):
        return config_hash(self.to_dict())


def _as_cfg(cfg):
    return TrialConfig.from_dict(cfg) if isinstance(cfg, dict) else cfg


@dataclass(frozen=True)
class TrialRecord:
    index: int
    seed: int
    M: int
    success: bool
    risk: float
    risk_se: float
    taylor_floor: float
    model_digest: str | None
    expansion_point: float | None
    error: str | None = None


def run_trial(cfg, trial_index: int) -> TrialRecord:
    """One sample path: draw M points, fit, score on an independent test draw."""
    cfg = _as_cfg(cfg)
    f = make_function(cfg.fn, cfg.allow_counterexamples)
    d = make_distribution(cfg.dist)
    seed_i = int(cfg.seed) ^ int(trial_index)
    xs = sample(d, (seed_i, 0), cfg.M)
    data = label(f, xs, seed=(seed_i, 0))
    try:
        model = fit(data, cfg.learner)
    except InsufficientDataError as exc:
        return TrialRecord(trial_index, seed_i, cfg.M, False, math.inf, 0.0, math.nan,
                           None, None, str(exc))
    xt = sample(d, (seed_i, 1), cfg.test_size)
    yt = f.eval(xt)
    with np.errstate(over="ignore", invalid="ignore"):
        err = np.abs(yt - model(xt))
        # the degree-N Taylor polynomial at the same point: the floor a perfect
        # derivative estimate would still leave
        floor = float(np.mean(np.abs(yt - taylor_polynomial(f, model.expansion_point,
                                                                 cfg.learner.N)(xt))))
    risk = float(np.mean(err))
    se = float(np.std(err, ddof=1) / math.sqrt(err.size)) if err.size > 1 else 0.0
    if not math.isfinite(risk):
        risk, se = math.inf, math.inf
    return TrialRecord(trial_index, seed_i, cfg.M, bool(risk <= cfg.eps), risk, se, floor,
                       model_digest(model), model.expansion_point)


@dataclass(frozen=True)
class TrialResult:
    records: tuple
    successes: int
    trials: int
    frequency: float
    ci_low: float
    ci_high: float
    M: int
    config_hash: str
    seed: int

    def to_dict(self):
        out = asdict(self)
        out["records"] = [asdict(r) for r in self.records]
        return out


def wilson_interval(k, n, level=0.95):
    ci = stats.binomtest(int(k), int(n)).proportion_ci(level, method="wilson")
    lo, hi = float(ci.low), float(ci.high)
    freq = k / n
    # guard the last ulp so the interval always contains the point estimate
    return min(lo, freq), max(hi, freq)


def _run_all(cfg, workers):
    idx = range(cfg.trials)
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            recs = list(ex.map(run_trial, [cfg] * cfg.trials, idx))
    else:
        recs = [run_trial(cfg, i) for i in idx]
    return sorted(recs, key=lambda r: r.index)


def success_frequency(cfg, workers=None) -> TrialResult:
    """Run every trial and aggregate; records are sorted by index before reduction."""
    cfg = _as_cfg(cfg)
    recs = _run_all(cfg, workers)
    k = sum(r.success for r in recs)
    lo, hi = wilson_interval(k, len(recs))
    return TrialResult(tuple(recs), k, len(recs), k / len(recs), lo, hi, cfg.M, cfg.hash,
                       cfg.seed)


@dataclass(frozen=True)
class ComplexityReport:
    M_hat: int | None
    frequency: float | None
    M_below: int | None
    frequency_below: float | None
    converged: bool
    eps: float
    delta: float
    history: tuple
    config_hash: str
    seed: int

    def to_dict(self):
        out = asdict(self)
        out["history"] = [list(h) for h in self.history]
        return out


def estimate_sample_complexity(cfg, eps=None, delta=None, M_max=M_MAX, workers=None,
                               raise_on_nonconvergence=False,
                               criterion="point") -> ComplexityReport:
    """Empirical sample complexity: smallest M with success frequency >= 1 - delta.

    Doubles M from 2 (N + 1) until the target frequency is reached, then
    bisects between the last failing and the first passing M. Reports the
    frequency at the answer and at its failing neighbour. Monotonicity in M
    is assumed by the bisection, as for any such search.

    ``criterion="point"`` compares the observed frequency with 1 - delta;
    ``"wilson"`` asks the lower end of the 95% Wilson interval to clear it,
    which keeps trial noise from landing below the true threshold.
    """
    if criterion not in ("point", "wilson"):
        raise ConfigError("criterion must be 'point' or 'wilson'")
    cfg = _as_cfg(cfg)
    if eps is not None:
        cfg = replace(cfg, eps=eps)
    if delta is not None:
        cfg = replace(cfg, delta=delta)
    target = 1.0 - cfg.delta
    cache = {}
    passed = {}

    def ok(M):
        if M not in cache:
            res = success_frequency(replace(cfg, M=M), workers)
            cache[M] = res.frequency
            passed[M] = (res.ci_low if criterion == "wilson" else res.frequency) >= target
        return passed[M]

    N = cfg.learner.N
    # fewer than N + 1 points can never fit; that M is a known failure
    lo = N
    cache[lo] = 0.0
    passed[lo] = False
    M = 2 * (N + 1)
    hi = None
    while M <= M_max:
        if ok(M):
            hi = M
            break
        lo = M
        M *= 2
    hist = tuple(sorted(cache.items()))
    if hi is None:
        rep = ComplexityReport(None, None, lo, cache[lo], False, cfg.eps, cfg.delta, hist,
                               cfg.hash, cfg.seed)
        if raise_on_nonconvergence:
            raise NonconvergenceError(f"no M <= {M_max} reached frequency {target:g}")
        return rep
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return ComplexityReport(hi, cache[hi], lo, cache[lo], True, cfg.eps, cfg.delta,
                            tuple(sorted(cache.items())), cfg.hash, cfg.seed)


SWEEP_HEADER = ("value", "median_risk", "q25_risk", "q75_risk", "success_frequency",
                "config_hash", "seed")


@dataclass(frozen=True)
class SweepRow:
    value: float
    median_risk: float
    q25_risk: float
    q75_risk: float
    success_frequency: float
    config_hash: str
    seed: int

    def as_tuple(self):
        return tuple(getattr(self, k) for k in SWEEP_HEADER)


def _with_degree(cfg, N):
    lc = cfg.learner
    m = None if lc.m_per_order == lc.N + 2 else max(lc.m_per_order, N + 1)
    return replace(cfg, learner=replace(lc, N=int(N), m_per_order=m))


def _quartiles(risks):
    r = np.asarray(risks, dtype=float)
    q = np.quantile(r, [0.25, 0.5, 0.75], method="inverted_cdf") if r.size else [np.nan] * 3
    return float(q[0]), float(q[1]), float(q[2])


def convergence_sweep(cfg, grid, kind="M", workers=None) -> list[SweepRow]:
    """Risk quartiles and success frequency for each M (or N) in ``grid``.

    Failed fits count as infinite risk, so quartiles use the inverted-CDF
    rule (no interpolation between an infinite and a finite value).
    """
    cfg = _as_cfg(cfg)
    if kind not in ("M", "N"):
        raise ConfigError("sweep kind must be 'M' or 'N'")
    rows = []
    for v in grid:
        c = replace(cfg, M=int(v)) if kind == "M" else _with_degree(cfg, v)
        res = success_frequency(c, workers)
        q25, med, q75 = _quartiles([r.risk for r in res.records])
        rows.append(SweepRow(v, med, q25, q75, res.frequency, c.hash, c.seed))
    return rows


PLOT_SCRIPT = '''"""Plot a convergence sweep CSV (written alongside the data)."""
import csv
import sys

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else {csv!r}
with open(path, newline="") as fh:
    rows = list(csv.DictReader(fh))
x = [float(r["value"]) for r in rows]
med = [float(r["median_risk"]) for r in rows]
lo = [float(r["q25_risk"]) for r in rows]
hi = [float(r["q75_risk"]) for r in rows]
plt.fill_between(x, lo, hi, alpha=0.3)
plt.plot(x, med, marker="o")
plt.yscale("log")
plt.xlabel({kind!r})
plt.ylabel("test risk")
plt.savefig(path.rsplit(".", 1)[0] + ".png", dpi=120)
'''


def plot_script(csv_path, kind):
    return PLOT_SCRIPT.format(csv=str(csv_path), kind=kind)

"""Registry of entire target functions with exact derivatives.

Every learnable target is a finite linear combination of ``sin(a*x)``,
``cos(a*x)``, ``exp(a*x)`` and one polynomial, so derivatives of every order
have closed forms. Functions with a finite radius of convergence live in a
separate, quarantined registry and carry no subexponential certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy import special

from . import kernels
from .errors import CapabilityError, ConfigError, RegistryError

MAX_ORDER = 64
CERTIFY_ORDER = 50

_KINDS = ("sin", "cos", "exp")


@dataclass(frozen=True)
class Term:
    kind: str
    weight: float = 1.0
    alpha: float = 1.0

    def derivative(self, n, x):
        """n-th derivative of weight * kind(alpha * x), vectorised over x."""
        w = self.weight * self.alpha**n
        ax = np.multiply(self.alpha, x)
        if self.kind == "exp":
            return w * np.exp(ax)
        # phase cycle keeps exact zeros at the origin (no sin(n*pi/2) round-off)
        shift = n % 4 if self.kind == "sin" else (n + 1) % 4
        if shift == 0:
            return w * np.sin(ax)
        if shift == 1:
            return w * np.cos(ax)
        if shift == 2:
            return -w * np.sin(ax)
        return -w * np.cos(ax)

    def derivative_bound(self, p):
        """Multiplier B with |d^n/dx^n term at p| <= B * |alpha|**n for all n."""
        if self.kind == "exp":
            return abs(self.weight) * math.exp(self.alpha * p)
        return abs(self.weight)


@dataclass(frozen=True)
class AnalyticFunctionSpec:
    """A named target with exact values, exact derivatives and a certificate K.

    ``K`` satisfies ``n! |a_n| <= K**n`` for every n >= 1, where ``a_n`` are the
    Taylor coefficients at the origin. It is ``None`` for quarantined
    functions, which have no such certificate.
    """

    name: str
    params: dict = field(default_factory=dict, compare=False)
    terms: tuple = ()
    poly: tuple = ()
    K: float | None = None
    quarantined: bool = False
    radius: float | None = None

    def __call__(self, x):
        return self.eval(x)

    def eval(self, x):
        return self.derivative(0, x)

    def derivative(self, n, x):
        if n < 0 or int(n) != n:
            raise ConfigError(f"derivative order must be a nonnegative integer, got {n!r}")
        if n > MAX_ORDER:
            raise CapabilityError(
                f"derivative order {n} exceeds supported order {MAX_ORDER} for {self.name}"
            )
        scalar = np.ndim(x) == 0
        x = np.asarray(x, dtype=np.float64)
        if self.quarantined:
            out = _runge_derivative(n, x, self.radius)
        else:
            out = np.zeros_like(x)
            for t in self.terms:
                out = out + t.derivative(n, x)
            if self.poly:
                out = out + _poly_derivative(self.poly, n, x)
        return float(np.asarray(out).reshape(())) if scalar else out

    def config(self) -> dict:
        return {"fn": self.name, **self.params}


def _poly_derivative(coeffs, n, x):
    if n >= len(coeffs):
        return np.zeros_like(x)
    # d^n/dx^n sum a_j x^j = sum_{j>=n} a_j j!/(j-n)! x^(j-n)
    dc = [coeffs[j] * math.perm(j, n) for j in range(n, len(coeffs))]
    return kernels.horner(dc, 0.0, x)


def _runge_derivative(n, x, radius):
    # 1/(1+u^2) = Im(1/(u-i)) ; d^n/du^n gives (-1)^n n! Im((u-i)^-(n+1))
    u = x / radius
    z = (u - 1j) ** (-(n + 1))
    return (-1) ** n * math.factorial(n) * np.imag(z) / radius**n


def _certify_K(terms, poly) -> float:
    """Smallest safe K >= 1 with n!|a_n| <= K^n for all n >= 1."""
    cand = 1.0
    zero = np.zeros(())
    for n in range(1, MAX_ORDER + 1):
        d = 0.0
        for t in terms:
            d += float(t.derivative(n, zero))
        if poly:
            d += float(_poly_derivative(poly, n, zero).reshape(()))
        if d != 0.0:
            cand = max(cand, abs(d) ** (1.0 / n))
    # beyond MAX_ORDER only exponential/trig terms contribute:
    # (sum |w| |a|^n)^(1/n) <= max|a| * max(1, sum|w|)^(1/n)
    if terms:
        amax = max(abs(t.alpha) for t in terms)
        wsum = sum(abs(t.weight) for t in terms)
        cand = max(cand, amax * max(1.0, wsum) ** (1.0 / (MAX_ORDER + 1)))
    if cand > 1.0:
        cand *= 1.0 + 1e-12
    return cand


def _mk(name, params, terms=(), poly=()):
    poly = tuple(float(c) for c in poly)
    while len(poly) > 1 and poly[-1] == 0.0:
        poly = poly[:-1]
    if len(poly) > MAX_ORDER + 1:
        raise CapabilityError(f"polynomial degree above {MAX_ORDER} is not supported")
    terms = tuple(terms)
    return AnalyticFunctionSpec(
        name=name, params=dict(params), terms=terms, poly=poly, K=_certify_K(terms, poly)
    )


def sin(alpha=1.0):
    return _mk("sin", {} if alpha == 1.0 else {"alpha": alpha}, [Term("sin", 1.0, alpha)])


def cos(alpha=1.0):
    return _mk("cos", {} if alpha == 1.0 else {"alpha": alpha}, [Term("cos", 1.0, alpha)])


def exp(alpha=1.0):
    return _mk("exp", {} if alpha == 1.0 else {"alpha": alpha}, [Term("exp", 1.0, alpha)])


def exp_scaled(alpha):
    return _mk("exp_scaled", {"alpha": alpha}, [Term("exp", 1.0, alpha)])


def poly(coeffs):
    if len(coeffs) == 0:
        raise ConfigError("poly needs at least one coefficient")
    return _mk("poly", {"coeffs": list(coeffs)}, poly=coeffs)


def combo(parts):
    """Linear combination; ``parts`` is a list of (weight, spec) pairs."""
    terms = []
    pc = []
    for w, f in parts:
        if f.quarantined:
            raise CapabilityError("quarantined functions cannot enter a combination")
        terms.extend(Term(t.kind, w * t.weight, t.alpha) for t in f.terms)
        if f.poly:
            if len(f.poly) > len(pc):
                pc.extend([0.0] * (len(f.poly) - len(pc)))
            for j, c in enumerate(f.poly):
                pc[j] += w * c
    params = {"terms": [{"weight": w, **f.config()} for w, f in parts]}
    return _mk("combo", params, terms, pc)


def runge(radius=1.0):
    """1/(1 + (x/radius)^2): analytic on R but with convergence radius ``radius``."""
    if radius <= 0:
        raise ConfigError("radius must be positive")
    return AnalyticFunctionSpec(
        name="runge", params={"radius": radius}, quarantined=True, radius=float(radius)
    )


REGISTRY = {
    "sin": lambda alpha=1.0: sin(alpha),
    "cos": lambda alpha=1.0: cos(alpha),
    "exp": lambda alpha=1.0: exp(alpha),
    "exp_scaled": lambda alpha: exp_scaled(alpha),
    "poly": lambda coeffs: poly(coeffs),
}

COUNTEREXAMPLES = {
    "runge": lambda radius=1.0: runge(radius),
}


def make_function(cfg: Any, allow_counterexamples=False) -> AnalyticFunctionSpec:
    """Build a function from a name or a config dict like ``{"fn": "poly", "coeffs": [2, 3]}``."""
    if isinstance(cfg, AnalyticFunctionSpec):
        return cfg
    if isinstance(cfg, str):
        cfg = {"fn": cfg}
    if not isinstance(cfg, dict) or "fn" not in cfg:
        raise ConfigError(f"function config needs an 'fn' key: {cfg!r}")
    params = {k: v for k, v in cfg.items() if k not in ("fn", "weight")}
    name = cfg["fn"]
    if name == "combo":
        parts = []
        for t in params.get("terms", []):
            parts.append((float(t.get("weight", 1.0)), make_function(t)))
        if not parts:
            raise ConfigError("combo needs a non-empty 'terms' list")
        return combo(parts)
    if name in REGISTRY:
        builder = REGISTRY[name]
    elif name in COUNTEREXAMPLES:
        if not allow_counterexamples:
            raise RegistryError(
                f"{name!r} is a quarantined counterexample; pass allow_counterexamples"
            )
        builder = COUNTEREXAMPLES[name]
    else:
        raise RegistryError(f"unknown function {name!r}")
    try:
        return builder(**params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {name!r}: {exc}") from None


def eval(f, x):
    f = make_function(f, allow_counterexamples=True)
    x = np.asarray(x, dtype=np.float64) if np.ndim(x) else float(x)
    if not np.all(np.isfinite(x)):
        raise ConfigError("evaluation points must be finite")
    return f.eval(x)


def true_derivative(f, n, p):
    f = make_function(f, allow_counterexamples=True)
    return f.derivative(n, p)


def subexponential_constant(f) -> float:
    f = make_function(f, allow_counterexamples=True)
    if f.K is None:
        raise CapabilityError(f"{f.name} has no subexponential certificate")
    return f.K


def check_certificate(f, n_max=CERTIFY_ORDER) -> bool:
    """True when n!|a_n| <= K^n for n = 1..n_max (Taylor coefficients at 0)."""
    f = make_function(f, allow_counterexamples=True)
    K = subexponential_constant(f)
    for n in range(1, n_max + 1):
        if abs(f.derivative(n, 0.0)) > K**n * (1 + 1e-12):
            return False
    return True


@dataclass(frozen=True)
class TaylorPolynomial:
    expansion_point: float
    coefficients: tuple

    @property
    def degree(self):
        return len(self.coefficients) - 1

    def __call__(self, x):
        out = kernels.horner(self.coefficients, self.expansion_point, np.atleast_1d(x))
        return float(out[0]) if np.ndim(x) == 0 else out


def taylor_polynomial(f, p, N) -> TaylorPolynomial:
    f = make_function(f, allow_counterexamples=True)
    if N < 0:
        raise ConfigError("degree must be nonnegative")
    coeffs = tuple(f.derivative(j, p) / math.factorial(j) for j in range(N + 1))
    return TaylorPolynomial(float(p), coeffs)


def remainder_bound(f, p, N, T) -> float:
    """Analytic bound on sup_{|x-p|<=T} |f(x) - T_{p,N}(f)(x)|.

    Uses |f^(j)(p)| <= B |alpha|^j for each exponential/trig term, so the tail
    sum_{j>N} B (|alpha| T)^j / j! = B e^z P(N+1, z) with z = |alpha| T.
    """
    f = make_function(f, allow_counterexamples=True)
    if f.quarantined:
        raise CapabilityError(f"{f.name} has no remainder certificate")
    total = 0.0
    for t in f.terms:
        z = abs(t.alpha) * T
        if z == 0.0:
            continue
        total += t.derivative_bound(p) * math.exp(z) * special.gammainc(N + 1, z)
    if f.poly:
        for j in range(N + 1, len(f.poly)):
            total += abs(f.derivative(j, p)) * T**j / math.factorial(j)
    return float(total)


def truncation_sup_error(f, p, N, T, grid=10_000) -> float:
    """Sup of |T_{p,N}(f) - f| over [p-T, p+T], maximised on a dense grid.

    The grid includes both endpoints; for the registered entire functions the
    result never exceeds :func:`remainder_bound`.
    """
    f = make_function(f, allow_counterexamples=True)
    if not (T > 0 and math.isfinite(T)):
        raise ConfigError("T must be finite and positive")
    tp = taylor_polynomial(f, p, N)
    x = np.linspace(p - T, p + T, grid)
    return float(np.max(np.abs(tp(x) - f.eval(x))))

"""Cost, risk and the body/tail bounds used to certify a learned model.

The expected cost E|f(x) - y(x)| is split at |x - p| = T into a body integral
(computed by adaptive quadrature against the marginal) and a tail, which is
bounded in closed form from the function's certificate K, the model's own
coefficient growth and the marginal's subgaussian constant c.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np
from scipy import integrate, special

from .analytic import make_function, taylor_polynomial, truncation_sup_error
from .dist import make_distribution
from .errors import CapabilityError, ConfigError

QUAD_EPSABS = 1e-9
QUAD_LIMIT = 10**6
DEFAULT_P_EXP = 2.0


class BudgetWarning(RuntimeWarning):
    pass


def cost(model, x, y):
    return np.abs(np.asarray(y, dtype=float) - model(x)) if np.ndim(x) else abs(y - model(x))


def empirical_risk(model, data) -> float:
    if len(data) == 0:
        raise ConfigError("empirical risk of an empty dataset")
    return float(np.mean(np.abs(data.y - model(data.x))))


def empirical_risk_with_se(model, data):
    """(mean cost, standard error of the mean)."""
    c = np.abs(data.y - model(data.x))
    return float(np.mean(c)), float(np.std(c, ddof=1) / math.sqrt(c.size)) if c.size > 1 else 0.0


# ---------------------------------------------------------------- quadrature


def _breakpoints(d):
    comps = getattr(d, "components", None)
    if comps:
        pts = []
        for c in comps:
            pts.extend(_breakpoints(c))
        return pts
    lo, hi = d.support()
    return [v for v in (lo, hi) if math.isfinite(v)]


def _integrate_cost(model, f, d, lo, hi):
    """Integral of |f - model| * density over [lo, hi] plus atoms in [lo, hi]."""
    total = 0.0
    err = 0.0
    slo, shi = d.support()
    a, b = max(lo, slo), min(hi, shi)
    if a < b:
        def integrand(x):
            return abs(f.eval(x) - model(x)) * float(d.pdf(x))

        pts = sorted({v for v in _breakpoints(d) + [model.expansion_point] if a < v < b})
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            if math.isinf(a) or math.isinf(b):
                edges = [a] + pts + [b]
                for u, v in zip(edges, edges[1:]):
                    val, e = integrate.quad(integrand, u, v, epsabs=QUAD_EPSABS,
                                            epsrel=1e-10, limit=1000)
                    total += val
                    err += e
            else:
                val, e = integrate.quad(integrand, a, b, epsabs=QUAD_EPSABS, epsrel=1e-10,
                                        limit=QUAD_LIMIT, points=pts or None)
                total += val
                err += e
    for loc, w in d.atoms():
        if lo <= loc <= hi:
            total += w * abs(f.eval(loc) - model(loc))
    return total, err


def body_risk_with_error(model, f, d, T):
    f = make_function(f, allow_counterexamples=True)
    d = make_distribution(d)
    if not T > 0:
        raise ConfigError("T must be positive")
    _require_density(d)
    p = model.expansion_point
    return _integrate_cost(model, f, d, p - T, p + T)


def body_risk(model, f, d, T) -> float:
    """Expected cost restricted to [p - T, p + T]."""
    return body_risk_with_error(model, f, d, T)[0]


def tail_risk_quadrature(model, f, d, T) -> float:
    """Expected cost on |x - p| > T by quadrature (a check on the closed-form bound)."""
    f = make_function(f, allow_counterexamples=True)
    d = make_distribution(d)
    _require_density(d)
    p = model.expansion_point
    left, _ = _integrate_cost(model, f, d, -math.inf, p - T)
    right, _ = _integrate_cost(model, f, d, p + T, math.inf)
    # atoms exactly at p +- T belong to the body
    for loc, w in d.atoms():
        if loc in (p - T, p + T):
            left -= w * abs(f.eval(loc) - model(loc))
    return left + right


def expected_cost(model, f, d) -> float:
    f = make_function(f, allow_counterexamples=True)
    d = make_distribution(d)
    _require_density(d)
    return _integrate_cost(model, f, d, -math.inf, math.inf)[0]


def _require_density(d):
    if d.name in ("cauchy", "student_t"):
        return
    try:
        d.certified_c()
    except CapabilityError as exc:
        if not d.atoms():
            raise CapabilityError(f"no usable density for {d!r}: {exc}") from None


# ---------------------------------------------------------------- tail bounds


def tail_bound(K, c, p_exp=DEFAULT_P_EXP) -> float:
    """Closed-form bound on the integral of exp(K|x|) under a subgaussian marginal.

    With t* = max(1, exp(K^2 p / c)) the integral is at most
    t* + 2 t*^(1-p) / (p - 1).
    """
    if not p_exp > 1:
        raise ConfigError("p_exp must exceed 1 for the bound to converge")
    if not (K > 0 and c > 0):
        raise ConfigError("K and c must be positive")
    expo = K * K * p_exp / c
    if expo > 700:
        return math.inf
    t_star = max(1.0, math.exp(expo))
    return t_star + 2.0 * t_star ** (1.0 - p_exp) / (p_exp - 1.0)


def exp_tail_integral_bound(K, c, T) -> float:
    """Bound on the integral of exp(K|x|) over |x| > T when P(|x| > s) <= exp(-c s^2).

    Layer cake: e^{KT} P(|x|>T) + K * int_T^inf e^{Ks} P(|x|>s) ds
              <= e^{KT - cT^2} + K e^{K^2/4c} sqrt(pi)/(2 sqrt c) erfc(sqrt c (T - K/2c)).
    Nonincreasing in T and tends to 0.
    """
    T = max(0.0, float(T))
    if K == 0:
        return math.exp(-c * T * T)
    lead = K * T - c * T * T
    z = math.sqrt(c) * (T - K / (2.0 * c))
    coef = K * math.sqrt(math.pi) / (2.0 * math.sqrt(c))
    if z >= 0:
        second = coef * special.erfcx(z) * math.exp(lead)
    else:
        g = K * K / (4.0 * c)
        if g > 700:
            return math.inf
        second = coef * math.exp(g) * special.erfc(z)
    return math.exp(lead) + second


def model_envelope(model):
    """(b0, K_model) with |model(x)| <= b0 + exp(K_model |x|) - 1 for all x.

    Expands sum c_j (x - p)^j in powers of |x| with |x - p| <= |x| + |p|.
    """
    c = np.abs(np.asarray(model.coefficients, dtype=float))
    ap = abs(model.expansion_point)
    n = len(c)
    b = np.zeros(n)
    for j in range(n):
        for k in range(j + 1):
            b[k] += c[j] * math.comb(j, k) * ap ** (j - k)
    K = 1.0
    for k in range(1, n):
        if b[k] > 0:
            K = max(K, (math.factorial(k) * b[k]) ** (1.0 / k))
    if K > 1.0:
        K *= 1.0 + 1e-12
    return float(b[0]), K


def tail_risk_bound(model, f, d, T) -> float:
    """Upper bound on the expected cost over |x - p| > T.

    Uses |f(x)| <= |f(0)| - 1 + exp(K|x|) from the function certificate and
    the analogous envelope of the model, integrated against the marginal's
    subgaussian tail. Zero when the marginal's support sits inside [p-T, p+T].
    """
    f = make_function(f, allow_counterexamples=True)
    d = make_distribution(d)
    if f.K is None:
        raise CapabilityError(f"{f.name} has no subexponential certificate")
    c = d.certified_c()
    p = model.expansion_point
    lo, hi = d.support()
    if p - T <= lo and hi <= p + T:
        return 0.0
    Tp = max(0.0, T - abs(p))
    B = max(abs(lo), abs(hi))
    if math.isfinite(B) and Tp >= B:
        return 0.0
    b0, Km = model_envelope(model)
    const = max(0.0, abs(f.eval(0.0)) - 1.0 + b0 - 1.0)
    return (const * math.exp(-c * Tp * Tp)
            + exp_tail_integral_bound(f.K, c, Tp)
            + exp_tail_integral_bound(Km, c, Tp))


# ---------------------------------------------------------------- budget


def epsilon_tilde(eps, N, T) -> float:
    """Per-derivative precision eps / (8 (N + 1) T^(N + 1)); T below 1 is raised to 1."""
    if not eps > 0:
        raise ConfigError("eps must be positive")
    if T < 1:
        warnings.warn(f"T = {T} < 1 replaced by 1 in the derivative budget", BudgetWarning,
                      stacklevel=2)
        T = 1.0
    return eps / (8.0 * (N + 1) * T ** (N + 1))


def coefficient_error_bound(coef_errors, T) -> float:
    """Body bound from coefficient errors: 2 T^(N+1) * sum_j |c_j - true c_j| (T >= 1)."""
    T = max(1.0, T)
    N = len(coef_errors) - 1
    return 2.0 * T ** (N + 1) * float(np.sum(np.abs(coef_errors)))


@dataclass(frozen=True)
class RiskReport:
    empirical_risk: float | None
    body_risk: float
    body_quad_error: float
    tail_bound: float
    T: float
    N: int
    I1_bound: float
    I2_bound: float
    epsilon_tilde: float
    max_coefficient_error: float
    decomposition_holds: bool

    def to_dict(self):
        return asdict(self)


def risk_decomposition(model, f, d, T, N=None, eps=None, test_data=None) -> RiskReport:
    """Body risk by quadrature next to the I1 + I2 bound and the closed-form tail bound.

    I1 comes from the model's actual coefficient errors against the true
    Taylor coefficients at p, I2 from the truncation error of the degree-N
    Taylor polynomial on [p - T, p + T]. ``epsilon_tilde`` is the per-order
    budget for ``eps`` when given, otherwise the achieved max coefficient error.
    """
    f = make_function(f)
    d = make_distribution(d)
    if N is None:
        N = model.degree
    p = model.expansion_point
    truth = taylor_polynomial(f, p, N).coefficients
    coefs = list(model.coefficients) + [0.0] * max(0, N + 1 - len(model.coefficients))
    errs = np.abs(np.asarray(coefs[: N + 1]) - np.asarray(truth))
    extra = np.asarray(model.coefficients[N + 1:], dtype=float)
    I1 = coefficient_error_bound(np.concatenate([errs, np.abs(extra)]), T)
    I2 = truncation_sup_error(f, p, N, T)
    body, qerr = body_risk_with_error(model, f, d, T)
    tail = tail_risk_bound(model, f, d, T)
    emp = None
    if test_data is not None:
        emp = empirical_risk(model, test_data)
    et = epsilon_tilde(eps, N, T) if eps is not None else float(np.max(errs))
    return RiskReport(
        empirical_risk=emp,
        body_risk=body,
        body_quad_error=qerr,
        tail_bound=tail,
        T=float(T),
        N=int(N),
        I1_bound=I1,
        I2_bound=I2,
        epsilon_tilde=et,
        max_coefficient_error=float(np.max(errs)),
        decomposition_holds=bool(body <= I1 + I2 + 1e-8),
    )

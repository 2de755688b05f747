import math

import numpy as np
import pytest

from taylor_learning import analytic
from taylor_learning.analytic import (
    check_certificate,
    make_function,
    remainder_bound,
    subexponential_constant,
    taylor_polynomial,
    true_derivative,
    truncation_sup_error,
)
from taylor_learning.errors import CapabilityError, ConfigError, RegistryError

POLY23 = {"fn": "poly", "coeffs": [2, 3]}


def test_eval_examples():
    assert analytic.eval("sin", 0.0) == 0.0
    assert analytic.eval("exp", 1.0) == math.e
    assert analytic.eval(POLY23, 5.0) == 17.0


def test_eval_unknown_name():
    with pytest.raises(RegistryError):
        analytic.eval("tanh", 0.0)


def test_eval_rejects_nonfinite():
    with pytest.raises(ConfigError):
        analytic.eval("sin", [0.0, math.inf])


def test_true_derivative_examples():
    assert true_derivative("sin", 1, 0.0) == 1.0
    assert true_derivative("sin", 2, 0.0) == 0.0
    assert true_derivative("exp", 7, 0.0) == 1.0


def test_derivative_order_cap():
    with pytest.raises(CapabilityError):
        true_derivative("sin", 65, 0.0)
    assert true_derivative("cos", 64, 0.0) == 1.0


def test_derivative_zero_is_eval():
    for f in ("sin", "cos", "exp", POLY23, {"fn": "exp_scaled", "alpha": -2.5}):
        for p in (-1.3, 0.0, 0.7):
            assert true_derivative(f, 0, p) == analytic.eval(f, p)


def test_taylor_polynomial_examples():
    assert taylor_polynomial("sin", 0, 3).coefficients == pytest.approx((0, 1, 0, -1 / 6))
    assert taylor_polynomial("exp", 0, 2).coefficients == pytest.approx((1, 1, 0.5))
    tp = taylor_polynomial(POLY23, 0, 5)
    assert tp.coefficients == (2, 3, 0, 0, 0, 0)
    assert tp.degree == 5
    assert tp(0.0) == 2.0


def test_taylor_polynomial_at_p_evaluates_c0():
    tp = taylor_polynomial("exp", 0.4, 6)
    assert tp(0.4) == tp.coefficients[0]


def test_truncation_polynomial_is_zero():
    for N in (1, 2, 5):
        for T in (0.5, 3.0, 40.0):
            assert truncation_sup_error(POLY23, 0, N, T) == 0.0


def test_truncation_sin_degree9_pi():
    # grid sup of |T_9 sin - sin| on [-pi, pi]; the Lagrange remainder
    # pi^11/11! = 7.37e-3 bounds it from above
    v = truncation_sup_error("sin", 0, 9, math.pi)
    lagrange = math.pi**11 / math.factorial(11)
    assert v == pytest.approx(6.9253e-3, rel=1e-3)
    assert v <= lagrange
    assert v <= remainder_bound("sin", 0, 9, math.pi)


def test_truncation_exp_monotone_in_N():
    vals = [truncation_sup_error("exp", 0, N, 2.0) for N in range(0, 16)]
    assert all(b <= a for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("name", ["sin", "cos", "exp"])
def test_truncation_doubling(name):
    for k in (4, 8, 16):
        assert truncation_sup_error(name, 0, 2 * k, 2.0) <= truncation_sup_error(name, 0, k, 2.0)


def test_remainder_bound_dominates_grid():
    for f in ("sin", "cos", "exp", {"fn": "exp_scaled", "alpha": 1.7}):
        for N in (2, 5, 9):
            for p in (0.0, 0.8):
                assert truncation_sup_error(f, p, N, 2.0) <= remainder_bound(f, p, N, 2.0) * (
                    1 + 1e-9) + 1e-15


def test_K_values():
    assert subexponential_constant("sin") == 1.0
    assert subexponential_constant("exp") == 1.0
    assert subexponential_constant({"fn": "exp_scaled", "alpha": 0.5}) == 1.0
    assert subexponential_constant({"fn": "exp_scaled", "alpha": -3.0}) == pytest.approx(3.0)
    # poly: max(1, max_j (j!|a_j|)^(1/j))
    K = subexponential_constant({"fn": "poly", "coeffs": [0, 0, 0, 5]})
    assert K == pytest.approx(30 ** (1 / 3))


REGISTERED = [
    "sin", "cos", "exp",
    {"fn": "exp_scaled", "alpha": 2.5},
    {"fn": "exp_scaled", "alpha": -0.3},
    POLY23,
    {"fn": "poly", "coeffs": [1, -4, 0.5, 0, 2]},
    {"fn": "combo", "terms": [{"fn": "sin", "weight": 2.0}, {"fn": "exp_scaled", "alpha": 1.5,
                                                              "weight": -1}, POLY23]},
]


@pytest.mark.parametrize("f", REGISTERED)
def test_certificate_up_to_50(f):
    spec = make_function(f)
    assert check_certificate(spec)
    K = spec.K
    for n in range(1, 51):
        assert abs(spec.derivative(n, 0.0)) <= K**n * (1 + 1e-12)


@pytest.mark.parametrize("f", REGISTERED)
def test_oracle_matches_central_difference(f):
    spec = make_function(f)
    rng = np.random.default_rng(1234)
    p = rng.uniform(-2, 2, 100)
    h = 1e-5
    fd = (spec.eval(p + h) - spec.eval(p - h)) / (2 * h)
    d1 = spec.derivative(1, p)
    scale = np.maximum(1.0, np.abs(spec.eval(p)))
    # round-off of the difference quotient scales with |f|; 1e-6 relative otherwise
    assert np.all(np.abs(fd - d1) <= 1e-6 * (1 + np.abs(d1)) * scale)


def test_counterexample_quarantine():
    with pytest.raises(RegistryError):
        make_function({"fn": "runge"})
    r = make_function({"fn": "runge", "radius": 1.0}, allow_counterexamples=True)
    assert r.quarantined and r.K is None
    with pytest.raises(CapabilityError):
        subexponential_constant(r)
    # derivatives from the closed form agree with a difference quotient
    h = 1e-5
    for x in (-0.7, 0.0, 1.3):
        fd = (r.eval(x + h) - r.eval(x - h)) / (2 * h)
        assert fd == pytest.approx(r.derivative(1, x), abs=1e-8)
    # n!|a_n| grows like n!, so no K can work
    assert abs(r.derivative(20, 0.0)) == pytest.approx(math.factorial(20))


def test_combo_matches_parts():
    f = make_function(REGISTERED[-1])
    x = np.linspace(-2, 2, 7)
    expect = 2 * np.sin(x) - np.exp(1.5 * x) + 2 + 3 * x
    np.testing.assert_allclose(f.eval(x), expect, rtol=1e-14)
    assert f.derivative(3, 0.3) == pytest.approx(-2 * np.cos(0.3) - 1.5**3 * np.exp(0.45))


def test_bad_params():
    with pytest.raises(ConfigError):
        make_function({"fn": "sin", "beta": 2})
    with pytest.raises(ConfigError):
        make_function({"no_fn": 1})
    with pytest.raises(ConfigError):
        taylor_polynomial("sin", 0, -1)

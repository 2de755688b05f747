import math
from fractions import Fraction

import numpy as np
import pytest

from taylor_learning.analytic import taylor_polynomial
from taylor_learning.dist import LabeledDataset, label, make_distribution, sample
from taylor_learning.errors import ConfigError, InsufficientDataError, NoGuaranteeError
from taylor_learning.learner import (
    LearnerConfig,
    _exact_cdf,
    density_interval,
    find_density_point,
    fit,
    required_samples,
    select_nodes,
)

SEED = 20240601


# ---------------------------------------------------------------- density point


def test_density_point_atom():
    assert find_density_point([3.7] * 20) == 3.7


def test_density_point_majority():
    p = find_density_point([0, 0, 0, 0, 10])
    a, b, _ = density_interval([0, 0, 0, 0, 10])
    assert abs(p - 0) <= b - a


def test_density_point_uniform_window():
    xs = sample({"dist": "uniform", "a": 0, "b": 1}, SEED, 10_000)
    p = find_density_point(xs)
    assert 0 <= p <= 1
    assert np.sum(np.abs(xs - p) < 0.05) >= 0.05 * 10_000 * 0.5


def test_density_point_ancestors_hold_mass():
    xs = sample("gaussian", SEED, 4096)
    p = find_density_point(xs)
    a0, b0 = xs.min(), xs.max()
    a, b, depth = density_interval(xs)
    # walk the dyadic ancestors of the final interval
    lo, hi = a0, b0
    for d in range(depth + 1):
        inside = np.sum((xs >= lo) & (xs <= hi))
        assert inside >= max(1, math.floor(xs.size * 2.0**-d))
        mid = lo + (hi - lo) / 2
        if p <= mid:
            hi = mid
        else:
            lo = mid


def test_density_point_permutation_invariant():
    rng = np.random.default_rng(1)
    xs = sample({"dist": "mixture", "components": [{"dist": "point_mass", "at": 0.3},
                                                   {"dist": "gaussian", "sigma": 2}],
                 "weights": [0.2, 0.8]}, SEED, 3000)
    p = find_density_point(xs)
    for _ in range(5):
        assert find_density_point(rng.permutation(xs)) == p


def test_density_point_errors():
    with pytest.raises(ConfigError):
        find_density_point([])
    with pytest.raises(ConfigError):
        find_density_point([0.0, math.inf])


# ---------------------------------------------------------------- required samples


def test_required_samples_examples():
    assert required_samples(1.0, 5, 0.1) == 5
    assert required_samples(0.5, 1, 0.5) == 2
    M = required_samples(0.5, 3, 0.05)
    assert _exact_cdf(2, M, 0.5) < Fraction(0.05) <= _exact_cdf(2, M - 1, 0.5)


def test_required_samples_zero_gamma():
    with pytest.raises(NoGuaranteeError):
        required_samples(0.0, 3, 0.1)
    with pytest.raises(ConfigError):
        required_samples(0.5, 0, 0.1)
    with pytest.raises(ConfigError):
        required_samples(0.5, 1, 1.0)


GRID_G = [0.05, 0.2, 0.4, 0.7, 1.0]
GRID_M = [1, 2, 4, 7, 12]
GRID_D = [0.5, 0.2, 0.1, 0.01, 0.001]


def test_required_samples_monotone():
    table = {(g, m, d): required_samples(g, m, d) for g in GRID_G for m in GRID_M
             for d in GRID_D}
    for (g, m, d), M in table.items():
        for g2 in GRID_G:
            if g2 > g:
                assert table[(g2, m, d)] <= M
        for m2 in GRID_M:
            if m2 > m:
                assert table[(g, m2, d)] >= M
        for d2 in GRID_D:
            if d2 < d:
                assert table[(g, m, d2)] >= M


# ---------------------------------------------------------------- node selection


def test_select_nodes_examples():
    s = select_nodes([-1, -0.1, 0.05, 2], 0, 2, 0.5)
    assert s.nodes == (0.05, -0.1) and s.complete
    s = select_nodes([5.0, 6.0], 0, 3, 1.0)
    assert s.nodes == () and s.shortfall == 3
    s = select_nodes([0.1, 0.1, 0.1, 0.2], 0, 3, 1.0)
    assert s.nodes == (0.1, 0.2) and s.shortfall == 1


def test_select_spread_distinct_and_in_window():
    xs = sample("gaussian", SEED, 5000)
    s = select_nodes(xs, 0.1, 11, 1.0, strategy="spread")
    assert len(set(s.nodes)) == 11
    assert all(abs(x - 0.1) < 1.0 for x in s.nodes)


# ---------------------------------------------------------------- fit


def test_fit_line():
    xs = sample({"dist": "uniform", "a": -1, "b": 1}, SEED, 50)
    m = fit(label({"fn": "poly", "coeffs": [2, 3]}, xs), LearnerConfig(N=1))
    p = m.expansion_point
    assert m.coefficients[0] == pytest.approx(2 + 3 * p, abs=1e-8)
    assert m.coefficients[1] == pytest.approx(3, abs=1e-8)
    assert m(p) == m.coefficients[0]
    assert m.degree == 1 and len(m.diagnostics) == 2


def test_fit_sin_recorded(recorded):
    xs = sample({"dist": "gaussian", "sigma": 1.0}, SEED, 10_000)
    m = fit(label("sin", xs), LearnerConfig(N=9))
    truth = taylor_polynomial("sin", m.expansion_point, 9).coefficients
    err = np.abs(np.array(m.coefficients) - truth)
    assert np.all(err[:6] <= 1e-2)
    rec = recorded["sin_fit"]
    assert m.expansion_point == rec["model"]["expansion_point"]
    np.testing.assert_allclose(m.coefficients, rec["model"]["coefficients"], rtol=1e-9,
                               atol=1e-12)


def test_fit_degree_zero():
    xs = sample({"dist": "uniform", "a": -1, "b": 1}, SEED, 200)
    data = label("exp", xs)
    m = fit(data, LearnerConfig(N=0))
    p = m.expansion_point
    nearest = xs[np.argmin(np.abs(xs - p))]
    assert m.coefficients == (math.exp(nearest),)


@pytest.mark.parametrize("deg,N", [(0, 0), (1, 3), (2, 2), (4, 6), (6, 6)])
def test_fit_polynomial_exact(deg, N):
    rng = np.random.default_rng(deg * 10 + N)
    coeffs = rng.uniform(-2, 2, deg + 1).tolist()
    xs = sample("gaussian", (SEED, deg, N), 100)
    m = fit(label({"fn": "poly", "coeffs": coeffs}, xs), LearnerConfig(N=N))
    truth = taylor_polynomial({"fn": "poly", "coeffs": coeffs}, m.expansion_point, N)
    cond = max(d.condition for d in m.diagnostics)
    assert np.max(np.abs(np.array(m.coefficients) - truth.coefficients)) <= 1e-6 * cond


def test_fit_deterministic():
    xs = sample("gaussian", SEED, 2000)
    d = label("cos", xs)
    assert fit(d, {"N": 7}) == fit(d, {"N": 7})


def test_fit_insufficient_data():
    with pytest.raises(InsufficientDataError) as e:
        fit(label("sin", [0.1, 0.1, 0.2]), LearnerConfig(N=3))
    assert e.value.report == {0: 0, 1: 0, 2: 1, 3: 2}
    with pytest.raises(ConfigError):
        fit(LabeledDataset(np.array([]), np.array([])), LearnerConfig(N=0))


def test_fit_atoms_only():
    # a point-mass pair has two distinct values, enough for a line
    d = {"dist": "mixture", "components": [{"dist": "point_mass", "at": 0.0},
                                           {"dist": "point_mass", "at": 1.0}],
         "weights": [0.6, 0.4]}
    xs = sample(d, SEED, 40)
    m = fit(label({"fn": "poly", "coeffs": [1, 2]}, xs), LearnerConfig(N=1, h_max=2.0))
    assert m(0.0) == pytest.approx(1.0) and m(1.0) == pytest.approx(3.0)


def test_fit_p_override():
    xs = sample("gaussian", SEED, 1000)
    m = fit(label("exp", xs), LearnerConfig(N=4, p_override=0.25))
    assert m.expansion_point == 0.25
    # six spread nodes over a width-2 window: truncation error near 1e-4
    assert m.coefficients[0] == pytest.approx(math.exp(0.25), rel=1e-3)


def test_fit_cond_gate_shrinks():
    xs = sample("gaussian", SEED, 5000)
    m = fit(label("sin", xs), LearnerConfig(N=9, cond_max=10.0))
    assert any(d.window < 1.0 or not d.passed for d in m.diagnostics)


def test_config_validation():
    with pytest.raises(ConfigError):
        LearnerConfig(N=3, m_per_order=3)
    with pytest.raises(ConfigError):
        LearnerConfig(h_shrink=1.0)
    with pytest.raises(ConfigError):
        LearnerConfig.from_dict({"N": 2, "bogus": 1})
    assert LearnerConfig(N=4).m_per_order == 6
    assert LearnerConfig.from_dict(LearnerConfig(N=2).to_dict()) == LearnerConfig(N=2)

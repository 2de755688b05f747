"""Regenerate recorded.json. Run only when a change is meant to move the record.

    python tests/fixtures/record.py
"""

import json
from dataclasses import replace
from pathlib import Path

import numpy as np

from taylor_learning import kernels, reference_config
from taylor_learning.analytic import taylor_polynomial
from taylor_learning.dist import label, make_distribution, sample
from taylor_learning.harness import (
    TrialConfig,
    convergence_sweep,
    estimate_sample_complexity,
    success_frequency,
)
from taylor_learning.io import model_to_dict
from taylor_learning.learner import LearnerConfig, fit
from taylor_learning.risk import risk_decomposition

OUT = Path(__file__).with_name("recorded.json")
SEED = 20240601


def trial_cfg(name, **kw):
    c = reference_config(name)
    c.pop("sweep", None)
    c.update(kw)
    return TrialConfig.from_dict(c)


def main():
    rec = {"backend": kernels.BACKEND}

    # sin / gaussian reference trial at M = 10^4
    cfg = trial_cfg("sin_gaussian")
    res = success_frequency(cfg)
    rec["sin_reference"] = {
        "config": cfg.to_dict(),
        "frequency": res.frequency,
        "success": [r.success for r in res.records],
        "risk": [r.risk for r in res.records],
        "digest": [r.model_digest for r in res.records],
    }

    # single fit on 10^4 gaussian draws, compared with the true coefficients
    xs = sample(make_distribution({"dist": "gaussian", "sigma": 1.0}), SEED, 10_000)
    data = label("sin", xs, SEED)
    model = fit(data, LearnerConfig(N=9))
    truth = taylor_polynomial("sin", model.expansion_point, 9).coefficients
    err = np.abs(np.asarray(model.coefficients) - truth)
    rep = risk_decomposition(model, "sin", {"dist": "gaussian", "sigma": 1.0}, np.pi, 9)
    rec["sin_fit"] = {
        "model": model_to_dict(model),
        "coefficient_error": err.tolist(),
        "body_risk": rep.body_risk,
        "I1": rep.I1_bound,
        "I2": rep.I2_bound,
    }

    # doubling sweeps of the three shipped reference configs
    rec["reference_sweeps"] = {}
    for name in ("sin_gaussian", "exp_uniform", "poly_mixture"):
        c = reference_config(name)
        rows = convergence_sweep(trial_cfg(name), c["sweep"]["values"])
        rec["reference_sweeps"][name] = [
            [r.value, r.median_risk, r.q25_risk, r.q75_risk, r.success_frequency] for r in rows
        ]

    # N sweep on sin at large M
    rows = convergence_sweep(trial_cfg("sin_gaussian", M=20_000), [1, 3, 5, 7, 9], "N")
    rec["sin_N_sweep"] = [[r.value, r.median_risk, r.success_frequency] for r in rows]

    # nonuniformity: same target and (eps, delta), gaussian sigma 1 vs 4
    rec["nonuniform"] = {}
    for name in ("nonuniform_sigma1", "nonuniform_sigma4"):
        r = estimate_sample_complexity(trial_cfg(name))
        rec["nonuniform"][name] = {"M_hat": r.M_hat, "frequency": r.frequency,
                                   "M_below": r.M_below, "frequency_below": r.frequency_below}

    # eps grid at sigma 4
    base = trial_cfg("nonuniform_sigma4", test_size=20_000)
    rec["eps_grid"] = [[e, estimate_sample_complexity(base, eps=e).M_hat]
                       for e in (0.2, 0.05, 0.0125, 0.003125)]

    # polynomial target on uniform: smallest M with N + 1 in-window points
    pc = TrialConfig(fn={"fn": "poly", "coeffs": [1.0, -2.0, 0.5]}, dist={"dist": "uniform",
                     "a": -1.0, "b": 1.0}, learner={"N": 2}, eps=1e-6, delta=0.1, trials=50,
                     seed=SEED, test_size=10_000)
    rec["poly_uniform_M_hat"] = estimate_sample_complexity(pc).M_hat

    OUT.write_text(json.dumps(rec, indent=1, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()

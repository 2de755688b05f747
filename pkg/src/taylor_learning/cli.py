"""Command line entry point: ``taylor-learn <command> [options]``.

Exit codes: 0 success, 2 bad config or input, 3 capability error,
4 nonconvergence.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import harness, io, kernels
from .analytic import make_function
from .dist import label, make_distribution, sample
from .errors import ConfigError, TaylorLearningError
from .fdweights import fd_weights
from .learner import LearnerConfig, fit
from .risk import risk_decomposition


def _floats(text):
    try:
        return [float(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"expected a list of numbers, got {text!r}") from None


def _load_config(args):
    cfg = io.read_json(args.config) if args.config else {}
    if not isinstance(cfg, dict):
        raise ConfigError("config file must hold a JSON object")
    if getattr(args, "seed", None) is not None:
        cfg["seed"] = args.seed
    return cfg


def _trial_config(cfg):
    cfg = {k: v for k, v in cfg.items() if k != "sweep"}
    return harness.TrialConfig.from_dict(cfg)


def cmd_weights(args):
    cfg = _load_config(args)
    nodes = _floats(" ".join(args.nodes)) if args.nodes else cfg.get("nodes")
    order = args.order if args.order is not None else cfg.get("order")
    point = args.point if args.point is not None else cfg.get("point", 0.0)
    if nodes is None or order is None:
        raise ConfigError("weights needs --nodes and --order (or both in --config)")
    exact = args.exact or bool(cfg.get("exact", False))
    t = fd_weights(nodes, int(order), float(point), exact=exact)
    inputs = {"nodes": list(map(float, nodes)), "order": int(order), "point": float(point),
              "exact": exact}
    out = {
        "nodes": [float(v) for v in t.nodes],
        "order": t.order,
        "point": float(t.point),
        "weights": [float(w) for w in t.weights],
        "condition_estimate": t.condition_estimate,
        "scale": float(t.scale),
        "config_hash": io.config_hash(inputs),
        "seed": None,
    }
    if exact:
        out["weights_exact"] = [str(w) for w in t.weights]
    io.write_json(out, args.out)


def cmd_sample(args):
    cfg = _load_config(args)
    try:
        f = make_function(cfg["fn"], cfg.get("allow_counterexamples", False))
        d = make_distribution(cfg["dist"])
        M = int(args.count or cfg["M"])
    except KeyError as exc:
        raise ConfigError(f"sample config is missing {exc}") from None
    seed = int(cfg.get("seed", 0))
    data = label(f, sample(d, seed, M), seed=seed)
    if args.out is None:
        raise ConfigError("sample needs --out")
    if str(args.out).endswith(".json"):
        io.write_json(io.dataset_envelope(data, d.config()), args.out)
    else:
        io.write_dataset_csv(data, args.out)


def _learner_from(cfg):
    if "learner" in cfg:
        return LearnerConfig.from_dict(cfg["learner"])
    keys = set(LearnerConfig.__dataclass_fields__)
    return LearnerConfig.from_dict({k: v for k, v in cfg.items() if k in keys})


def cmd_fit(args):
    cfg = _load_config(args)
    lc = _learner_from(cfg)
    if args.N is not None:
        lc = replace(lc, N=args.N, m_per_order=None)
    if not args.data:
        raise ConfigError("fit needs --data")
    if str(args.data).endswith(".json"):
        data = io.dataset_from_envelope(io.read_json(args.data))
    else:
        data = io.read_dataset_csv(args.data)
    model = fit(data, lc)
    io.write_json(io.model_to_dict(model, lc.to_dict(), cfg.get("seed")), args.out)


def cmd_risk(args):
    cfg = _load_config(args)
    if not args.model:
        raise ConfigError("risk needs --model")
    model = io.model_from_dict(io.read_json(args.model))
    fn = io.parse_json_arg(args.fn) if args.fn else cfg.get("fn")
    dist = io.parse_json_arg(args.dist) if args.dist else cfg.get("dist")
    T = args.T if args.T is not None else cfg.get("T")
    if fn is None or dist is None or T is None:
        raise ConfigError("risk needs --fn, --dist and --T")
    f = make_function(fn)
    d = make_distribution(dist)
    N = args.N if args.N is not None else cfg.get("N")
    eps = args.eps if args.eps is not None else cfg.get("eps")
    test = None
    seed = cfg.get("seed")
    if args.test_size:
        seed = 0 if seed is None else seed
        test = label(f, sample(d, (int(seed), 1), args.test_size))
    rep = risk_decomposition(model, f, d, float(T), N=N, eps=eps, test_data=test).to_dict()
    rep["config_hash"] = io.config_hash({"fn": f.config(), "dist": d.config(), "T": T, "N": N,
                                         "model": io.model_to_dict(model)})
    rep["seed"] = seed
    io.write_json(rep, args.out)


def cmd_trial(args):
    cfg = _trial_config(_load_config(args))
    if args.index is not None:
        rec = harness.run_trial(cfg, args.index)
        out = {"record": rec.__dict__, "config_hash": cfg.hash, "seed": cfg.seed}
    else:
        out = harness.success_frequency(cfg, args.workers).to_dict()
    io.write_json(out, args.out)


def cmd_complexity(args):
    cfg = _trial_config(_load_config(args))
    rep = harness.estimate_sample_complexity(cfg, eps=args.eps, delta=args.delta,
                                             M_max=args.M_max, workers=args.workers,
                                             criterion=args.criterion)
    io.write_json(rep.to_dict(), args.out)
    if not rep.converged:
        print(f"no M <= {args.M_max} reached the target frequency", file=sys.stderr)
        return 4
    return 0


def cmd_sweep(args):
    raw = _load_config(args)
    sw = raw.get("sweep", {})
    kind = args.kind or sw.get("kind", "M")
    values = _floats(args.values) if args.values else sw.get("values")
    if values is None:
        raise ConfigError("sweep needs --values or a 'sweep' block in the config")
    values = [int(v) for v in values]
    cfg = _trial_config(raw)
    rows = harness.convergence_sweep(cfg, values, kind, args.workers)
    io.write_csv_table(harness.SWEEP_HEADER, [r.as_tuple() for r in rows], args.out)
    if args.emit_plot_script:
        if args.out is None:
            raise ConfigError("--emit-plot-script needs --out")
        target = Path(args.out).with_suffix(".plot.py")
        target.write_text(harness.plot_script(Path(args.out).name, kind))


def build_parser():
    ap = argparse.ArgumentParser(prog="taylor-learn",
                                 description="Learn analytic functions from samples by "
                                             "finite-difference Taylor expansion.")
    ap.add_argument("--version", action="version", version=f"%(prog)s ({kernels.BACKEND} kernels)")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", help="output file (default: stdout)")
        if seed:
            p.add_argument("--seed", type=int, help="override the config seed")
        return p

    p = common(sub.add_parser("weights", help="finite-difference weights"), seed=False)
    p.add_argument("--nodes", nargs="+", help="node values, space or comma separated")
    p.add_argument("--order", type=int)
    p.add_argument("--point", type=float)
    p.add_argument("--exact", action="store_true", help="rational arithmetic")
    p.set_defaults(func=cmd_weights)

    p = common(sub.add_parser("sample", help="draw and label a dataset"))
    p.add_argument("--count", type=int)
    p.set_defaults(func=cmd_sample)

    p = common(sub.add_parser("fit", help="fit a polynomial model to a dataset"))
    p.add_argument("--data")
    p.add_argument("--N", type=int)
    p.set_defaults(func=cmd_fit)

    p = common(sub.add_parser("risk", help="risk decomposition of a fitted model"))
    p.add_argument("--model")
    p.add_argument("--fn", help="name, inline JSON or JSON file")
    p.add_argument("--dist", help="name, inline JSON or JSON file")
    p.add_argument("--T", type=float)
    p.add_argument("--N", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--test-size", type=int, default=0)
    p.set_defaults(func=cmd_risk)

    p = common(sub.add_parser("trial", help="run trials and report the success frequency"))
    p.add_argument("--index", type=int, help="run only this trial")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_trial)

    p = common(sub.add_parser("complexity", help="empirical sample complexity"))
    p.add_argument("--eps", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--M-max", type=int, default=harness.M_MAX)
    p.add_argument("--criterion", choices=("point", "wilson"), default="point")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_complexity)

    p = common(sub.add_parser("sweep", help="convergence sweep over M or N"))
    p.add_argument("--kind", choices=("M", "N"))
    p.add_argument("--values")
    p.add_argument("--workers", type=int)
    p.add_argument("--emit-plot-script", action="store_true")
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return int(args.func(args) or 0)
    except TaylorLearningError as exc:
        print(f"taylor-learn: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"taylor-learn: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

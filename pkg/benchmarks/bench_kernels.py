"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Both backends are imported directly, so the result does not depend on
TAYLOR_LEARNING_PURE. Without a built extension only the Python column is shown.
"""

import argparse
import timeit

import numpy as np

from taylor_learning import _pykernels

try:
    from taylor_learning import _ckernels
except ImportError:
    _ckernels = None


def cases():
    rng = np.random.default_rng(0)
    nodes = np.sort(rng.uniform(-1, 1, 9))
    coeffs = rng.normal(size=10)
    xs = rng.normal(size=100_000)
    sorted_xs = np.sort(rng.normal(size=100_000))
    return {
        "fornberg_weights (9 nodes, order 8)": lambda k: k.fornberg_weights(0.1, nodes, 8),
        "horner (degree 9, 1e5 points)": lambda k: k.horner(coeffs, 0.2, xs),
        "binom_cdf (k=50, M=5000)": lambda k: k.binom_cdf(50, 5000, 0.02),
        "required_samples_search (0.01, 20, 0.05)":
            lambda k: k.required_samples_search(0.01, 20, 0.05),
        "density_bisect (1e5 sorted points)": lambda k: k.density_bisect(sorted_xs, 8, 1e-9),
    }


def best_of(fn, repeat):
    t = timeit.Timer(fn)
    n, _ = t.autorange()
    return min(t.repeat(repeat, n)) / n


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    print(f"{'kernel':44s} {'python':>12s} {'cython':>12s} {'speedup':>8s}")
    for name, call in cases().items():
        tp = best_of(lambda: call(_pykernels), args.repeat)
        if _ckernels is None:
            print(f"{name:44s} {tp * 1e6:10.1f}us {'n/a':>12s} {'':>8s}")
            continue
        tc = best_of(lambda: call(_ckernels), args.repeat)
        print(f"{name:44s} {tp * 1e6:10.1f}us {tc * 1e6:10.1f}us {tp / tc:7.1f}x")


if __name__ == "__main__":
    main()

"""Kernel selection: compiled extension when available, pure Python otherwise.

Set ``TAYLOR_LEARNING_PURE=1`` to force the Python kernels.
"""

import os

from . import _pykernels

BACKEND = "python"

if os.environ.get("TAYLOR_LEARNING_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
else:
    _impl = _pykernels

fornberg_weights = _impl.fornberg_weights
horner = _impl.horner
binom_cdf = _impl.binom_cdf
required_samples_search = _impl.required_samples_search
density_bisect = _impl.density_bisect

__all__ = [
    "BACKEND",
    "fornberg_weights",
    "horner",
    "binom_cdf",
    "required_samples_search",
    "density_bisect",
]

"""Kernel backend selection.

numba kernels are used by default. Set ``TLBOUNDS_DISABLE_NUMBA=1`` to force
the pure-numpy path (also used automatically when numba cannot be imported).
The flag is read once, at import time.
"""

import os

import numpy as np

from . import _kernels_numpy

_DISABLED = os.environ.get("TLBOUNDS_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

if _DISABLED:
    _impl = _kernels_numpy
    BACKEND = "numpy"
else:
    try:
        from . import _kernels_numba as _impl
        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _impl = _kernels_numpy
        BACKEND = "numpy"


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def pair_gap_max(M, v, squared=False):
    value, a, b = _impl.pair_gap_max(_f64(M), _f64(v), bool(squared))
    return float(value), int(a), int(b)


def member_abs_risks(M, idx, targets, weights):
    idx = np.ascontiguousarray(idx, dtype=np.int64)
    return np.asarray(_impl.member_abs_risks(_f64(M), idx, _f64(targets), _f64(weights)))


def rademacher_exact_total(V):
    return float(_impl.rademacher_exact_total(_f64(V)))


def rademacher_sup_values(V, signs):
    return np.asarray(_impl.rademacher_sup_values(_f64(V), _f64(signs)))

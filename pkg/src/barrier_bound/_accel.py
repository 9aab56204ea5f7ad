"""Optional numba acceleration.

Set ``BARRIER_BOUND_NUMBA=0`` to force the pure-numpy kernels. When numba is
missing the numpy path is used regardless of the flag.
"""
from __future__ import annotations

import os

try:
    import numba as _numba
except ImportError:  # pragma: no cover - exercised only without numba
    _numba = None

_FLAG = os.environ.get("BARRIER_BOUND_NUMBA", "1").strip().lower()
NUMBA_ENABLED = _numba is not None and _FLAG not in {"0", "false", "no", "off"}


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity decorator otherwise."""
    if _numba is None:
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
    return _numba.njit(*args, **kwargs)

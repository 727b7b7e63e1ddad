"""Optional numba acceleration.

Set ``VORTEXLAB_DISABLE_JIT=1`` to run the pure-numpy code paths.
"""
from __future__ import annotations

import os

_disabled = os.environ.get("VORTEXLAB_DISABLE_JIT", "").strip().lower() in {"1", "true", "yes"}

try:
    if _disabled:
        raise ImportError
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via env flag in a subprocess
    _njit = None
    HAVE_NUMBA = False

JIT_ENABLED = HAVE_NUMBA


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity decorator otherwise."""
    if JIT_ENABLED:
        kwargs.setdefault("cache", True)
        return _njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f

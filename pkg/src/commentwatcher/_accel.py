"""Numba acceleration switch for the hot numeric kernels.

Kernels are written as plain numpy loop code; by default they are wrapped
with numba's @njit. Setting COMMENTWATCHER_NO_NUMBA=1 selects the pure
interpreted path instead. Both paths execute the same source, so results
are bit-identical either way.
"""
from __future__ import annotations

import os

DISABLE_ENV = "COMMENTWATCHER_NO_NUMBA"


def numba_enabled() -> bool:
    return os.environ.get(DISABLE_ENV, "").lower() not in ("1", "true", "yes")


def maybe_njit(fn):
    if not numba_enabled():
        return fn
    from numba import njit
    return njit(cache=True)(fn)

"""Kernel acceleration switch.

Hot numeric loops ship in two flavors: a numba-jitted loop kernel and a
vectorized pure-numpy twin. The env var ``PLAYERSEG_NUMBA`` picks the path
at import time:

  * unset / ``1`` / ``auto`` -> jit the loop kernels when numba imports
  * ``0`` -> pure numpy everywhere (no numba import at all)

``benchmarks/bench_kernels.py`` times both paths against each other.
"""

from __future__ import annotations

import os

_ENV_VAR = "PLAYERSEG_NUMBA"


def _resolve() -> bool:
    flag = os.environ.get(_ENV_VAR, "auto").strip().lower()
    if flag in ("0", "off", "false", "no"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        if flag in ("1", "on", "true", "yes"):
            raise
        return False
    return True


NUMBA_ACTIVE = _resolve()


def njit(fn):
    """Jit `fn` when the numba path is active, otherwise return it unchanged."""
    if NUMBA_ACTIVE:
        import numba

        return numba.njit(cache=True)(fn)
    return fn


def select(jit_impl, numpy_impl):
    """Pick the active implementation of a kernel pair.

    `jit_impl` must already be wrapped with :func:`njit`; `numpy_impl` is the
    vectorized fallback used when numba is disabled.
    """
    return jit_impl if NUMBA_ACTIVE else numpy_impl

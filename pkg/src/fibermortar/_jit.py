"""Kernel compilation switch.

Hot element kernels are written once in numpy-compatible Python and compiled
with numba when available. Set ``FIBERMORTAR_DISABLE_NUMBA=1`` to run the same
kernels as plain numpy code (useful for debugging and for benchmarking).
"""
import os

_DISABLE = os.environ.get("FIBERMORTAR_DISABLE_NUMBA", "0").lower() in ("1", "true", "yes")

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

USE_NUMBA = numba is not None and not _DISABLE


def njit(func):
    """Compile ``func`` in nopython mode unless the numpy fallback is selected."""
    if USE_NUMBA:
        return numba.njit(cache=True)(func)
    return func


def backend():
    return "numba" if USE_NUMBA else "numpy"

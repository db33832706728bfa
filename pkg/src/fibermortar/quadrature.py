"""Gauss-Legendre rules on [-1, 1], [0, 1] and the reference cube."""
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def gauss_legendre(n):
    """Return ``(points, weights)`` of the n-point rule on [-1, 1]."""
    if n < 1:
        raise ValueError(f"quadrature order must be >= 1, got {n}")
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


@lru_cache(maxsize=None)
def gauss_unit_interval(n):
    """n-point Gauss rule mapped to [0, 1]."""
    x, w = gauss_legendre(n)
    t = 0.5 * (x + 1.0)
    wt = 0.5 * w
    return t, wt


@lru_cache(maxsize=None)
def gauss_hex(n=2):
    """Tensor-product rule on [-1, 1]^3; points ``(n**3, 3)``, weights ``(n**3,)``."""
    x, w = gauss_legendre(n)
    pts = np.array([[a, b, c] for c in x for b in x for a in x])
    wts = np.array([wa * wb * wc for wc in w for wb in w for wa in w])
    return pts, wts

"""Gamma and modified Bessel K in double and extended precision.

Double precision goes through ``math.gamma`` and ``scipy.special.kve``;
extended precision through mpmath.  ``kv_integral`` is an independent
quadrature of ``K_nu(z) = int_0^inf exp(-z cosh s) cosh(nu s) ds`` kept for
cross-checking the library route.
"""

from __future__ import annotations

import math

import mpmath
import numpy as np
from scipy import special as _sp

gamma = math.gamma
lgamma = math.lgamma


def kv(nu: float, z):
    return _sp.kv(nu, z)


def kve(nu: float, z):
    """Exponentially scaled ``K_nu(z) * exp(z)``."""
    return _sp.kve(nu, z)


def kv_integral(nu: float, z: float, n: int = 2000) -> float:
    # integrand is below exp(-z cosh s) ~ 1e-300 past s_max
    s_max = math.acosh(max(1.0, 700.0 / z)) + 1.0
    s = np.linspace(0.0, s_max, 2 * n + 1)
    y = np.exp(-z * np.cosh(s)) * np.cosh(nu * s)
    h = s[1] - s[0]
    return float(h / 3 * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum()))


def mp_gamma(x):
    return mpmath.gamma(x)


def mp_kv(nu, z):
    return mpmath.besselk(nu, z)

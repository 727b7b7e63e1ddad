"""Modified Bessel functions K0 and K1 of real positive argument.

Ascending series for x <= 2, Steed's continued fraction above.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._jit import njit

EULER_GAMMA = 0.5772156649015329
SEAM = 2.0
_TINY = 1e-300
_EPS = 1e-16
_MAXIT = 10000


@njit
def _k01_series(x):
    # Temme's series for nu = 0, cf. NR bessik with xmu = 0.
    x2 = 0.5 * x
    d = -math.log(x2)
    ff = d - EULER_GAMMA  # gampl = gammi = 1 at mu = 0
    sum0 = ff
    p = 0.5
    q = 0.5
    c = 1.0
    d = x2 * x2
    sum1 = p
    for i in range(1, _MAXIT):
        ff = (i * ff + p + q) / (i * i)
        c *= d / i
        p /= i
        q /= i
        delh = c * ff
        sum0 += delh
        sum1 += c * (p - i * ff)
        if abs(delh) < abs(sum0) * _EPS:
            break
    return sum0, sum1 / x2


@njit
def _k01_cf2(x):
    # Steed's algorithm for the CF2 continued fraction, nu = 0.
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d
    delh = d
    q1 = 0.0
    q2 = 1.0
    a1 = 0.25
    q = a1
    c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, _MAXIT):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels) < abs(s) * _EPS:
            break
    k0 = math.sqrt(math.pi / (2.0 * x)) * math.exp(-x) / s
    k1 = k0 * (x + 0.5 - a1 * h) / x
    return k0, k1


@njit
def k01(x):
    """Return ``(K0(x), K1(x))`` for ``x > 0`` (no validation, kernel use)."""
    if x <= SEAM:
        return _k01_series(x)
    return _k01_cf2(x)


def _check(x: float) -> float:
    x = float(x)
    if not math.isfinite(x) and x > 0:
        return x
    if not x > 0.0:
        raise ValueError(f"modified Bessel K requires x > 0, got {x!r}")
    return x


def bessel_k0(x: float) -> float:
    """K0(x) for real x > 0.

    Raises
    ------
    ValueError
        If ``x <= 0``. Arguments below 1e-300 return ``inf``.
    """
    x = _check(x)
    if x == math.inf:
        return 0.0
    if x < _TINY:
        return math.inf
    return float(k01(x)[0])


def bessel_k1(x: float) -> float:
    """K1(x) for real x > 0; same conventions as :func:`bessel_k0`."""
    x = _check(x)
    if x == math.inf:
        return 0.0
    if x < _TINY:
        return math.inf
    return float(k01(x)[1])


@dataclass(frozen=True, slots=True)
class BesselEval:
    x: float
    k0: float
    k1: float


def bessel_eval(x: float) -> BesselEval:
    return BesselEval(float(x), bessel_k0(x), bessel_k1(x))


def seam_residual() -> tuple[float, float]:
    """Relative mismatch of the two branches at the crossover point."""
    s0, s1 = _k01_series(SEAM)
    c0, c1 = _k01_cf2(SEAM)
    return abs(s0 - c0) / abs(c0), abs(s1 - c1) / abs(c1)


def k0_k1_arrays(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized convenience wrapper (loops over scalars)."""
    x = np.asarray(x, dtype=float)
    k0 = np.empty_like(x)
    k1 = np.empty_like(x)
    for i, v in np.ndenumerate(x):
        k0[i] = bessel_k0(v)
        k1[i] = bessel_k1(v)
    return k0, k1

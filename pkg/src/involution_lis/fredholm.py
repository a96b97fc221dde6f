"""Airy-kernel Fredholm determinant, an independent route to F2 and u.

``F2(s) = det(I - K_Ai)`` on ``L^2(s, inf)``, discretised by Gauss-Legendre
quadrature after the map ``x = s + 10 tan(pi (xi + 1) / 4)`` from ``[-1, 1]``.
Uses scipy's Airy functions, so it shares nothing with the collocation solver.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import airy as _scipy_airy


def _nodes(s: float, m: int):
    xi, wi = np.polynomial.legendre.leggauss(m)
    theta = math.pi * (xi + 1.0) / 4.0
    x = s + 10.0 * np.tan(theta)
    w = wi * 10.0 * (math.pi / 4.0) / np.cos(theta) ** 2
    return x, w


def airy_kernel_matrix(x: np.ndarray) -> np.ndarray:
    ai, aip, _, _ = _scipy_airy(x)
    dx = x[:, None] - x[None, :]
    num = ai[:, None] * aip[None, :] - aip[:, None] * ai[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        k = num / dx
    diag = aip * aip - x * ai * ai
    k[np.diag_indices_from(k)] = diag
    return k


def f2_fredholm(s: float, m: int = 80) -> float:
    x, w = _nodes(s, m)
    sw = np.sqrt(w)
    mat = np.eye(m) - sw[:, None] * airy_kernel_matrix(x) * sw[None, :]
    return float(np.linalg.det(mat))


def u_from_fredholm(x: float, h: float = 0.02, m: int = 80) -> float:
    """Hastings-McLeod ``u(x) = -sqrt(-(log F2)''(x))`` by a 5-point stencil."""
    pts = [math.log(f2_fredholm(x + k * h, m)) for k in (-2, -1, 0, 1, 2)]
    d2 = (-pts[0] + 16 * pts[1] - 30 * pts[2] + 16 * pts[3] - pts[4]) / (12 * h * h)
    return -math.sqrt(-d2)


def f2_moments_fredholm(m: int = 60, panels: int = 40) -> tuple[float, float]:
    """Mean and variance of F2 from the determinant, by integration by parts."""
    gx, gw = np.polynomial.legendre.leggauss(16)

    def integrate(f, a, b):
        total = 0.0
        edges = np.linspace(a, b, panels + 1)
        for lo, hi in zip(edges[:-1], edges[1:]):
            xs = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gx
            total += 0.5 * (hi - lo) * sum(wk * f(xk) for xk, wk in zip(xs, gw))
        return total

    f2 = lambda s: f2_fredholm(s, m)
    m1 = integrate(lambda s: 1.0 - f2(s), 0.0, 10.0) - integrate(f2, -10.0, 0.0)
    m2 = integrate(lambda s: 2 * s * (1.0 - f2(s)), 0.0, 10.0) - integrate(lambda s: 2 * s * f2(s), -10.0, 0.0)
    return m1, m2 - m1 * m1

from __future__ import annotations

import math

import numpy as np
import pytest

from involution_lis import lax
from involution_lis.errors import OutOfDomain
from involution_lis.lax import LaxRouteConfig, SIGMA1, interpolant_curves, interpolants, m_at
from involution_lis.painleve2 import eval_tw

X_ROUTE = LaxRouteConfig(route="x_route")


def _e2(grid, x):
    return math.exp(2 * float(grid.log_fe(np.array([x]))[1][0]))


def test_closed_form_at_zero(grid):
    m = m_at(grid, 0.0, 0.0).m
    e2 = _e2(grid, 0.0)
    assert m[0, 1] == -e2 and m[1, 1] == e2
    assert m[0, 0] == pytest.approx(0.5 * (e2 + 1 / e2), rel=1e-15)


def test_x_route_starts_on_triangular_datum(grid):
    w = 0.7
    r = m_at(grid, w, 8.5, X_ROUTE)
    assert r.x_start >= 8.5
    # the datum is exact up to O(Ai(x)) corrections
    assert r.m[0, 0] == pytest.approx(1.0, abs=1e-6)
    assert r.m[1, 0] == pytest.approx(0.0, abs=1e-6)
    # m12 e^{-a} = -1 + int_x^inf Ai e^{-a}, a 4e-4 correction here
    n12 = -1.0 + lax.airy_laplace_tail(w, 8.5)
    assert r.m[0, 1] == pytest.approx(n12 * math.exp(lax.exponent(w, 8.5)), rel=1e-8)
    assert r.m[0, 1] == pytest.approx(-math.exp(lax.exponent(w, 8.5)), rel=1e-3)


def test_route_agreement_example(grid):
    r = m_at(grid, 0.5, -1.0, LaxRouteConfig(route="both"))
    assert r.discrepancy <= 1e-5
    assert r.route == "both" and "x_route_m" in r.notes


@pytest.mark.parametrize("w", [-1.5, -0.4, 0.3, 1.2, 3.0])
@pytest.mark.parametrize("x", [-4.0, 0.0, 4.0])
def test_det_and_routes(grid, w, x):
    r = m_at(grid, w, x, LaxRouteConfig(route="both"))
    assert r.det_drift <= 1e-8
    assert r.discrepancy <= 1e-5
    assert np.isrealobj(r.m)


@pytest.mark.parametrize("w", [0.3, 1.0, 2.0])
@pytest.mark.parametrize("x", [-3.0, 0.0, 3.0])
def test_sigma1_symmetry_across_routes(grid, w, x):
    # x-route at -w integrates the w < 0 ODE directly; the w-route runs at +w
    minus = m_at(grid, -w, x, X_ROUTE).m
    plus = m_at(grid, w, x).m
    assert lax.discrepancy(SIGMA1 @ plus @ SIGMA1, minus) <= 1e-6


@pytest.mark.parametrize("w", [-1.0, -0.3, 0.8])
def test_x_ode_residual(grid, w):
    h = 1e-3
    for x in (-2.0, 1.0):
        mp, mm, m0 = (m_at(grid, w, x + d).m for d in (h, -h, 0.0))
        u, _ = grid.u_du(x)
        s3 = np.diag([1.0, -1.0])
        rhs = w * (m0 @ s3 - s3 @ m0) + u * SIGMA1 @ m0
        scale = max(1.0, np.abs(m0).max())
        assert np.abs((mp - mm) / (2 * h) - rhs).max() / scale < 1e-5


def test_negative_w_tends_to_identity(grid):
    # m -> I as |w| -> inf, with the off-diagonal entry of the decaying column O(1/w)
    far = m_at(grid, -6.0, 0.0).m
    near = m_at(grid, -3.0, 0.0).m
    assert abs(far[0, 0] - 1) < abs(near[0, 0] - 1) < 0.1
    assert abs(far[1, 0]) < 0.1


def test_out_of_domain(grid):
    with pytest.raises(OutOfDomain):
        m_at(grid, 6.5, 0.0)
    with pytest.raises(OutOfDomain):
        m_at(grid, 1.0, 30.0)
    with pytest.raises(ValueError):
        LaxRouteConfig(route="z_route")


def test_endpoint_zero_is_f1(grid):
    xs = np.arange(-8.0, 6.0001, 0.25)
    sq, di = interpolant_curves(grid, xs, 0.0)
    f1 = eval_tw(grid, xs, 1)
    assert np.max(np.abs(sq - f1)) < 1e-15
    assert np.max(np.abs(di - f1**2)) < 1e-15


@pytest.mark.parametrize("w", [1e-7, -1e-7])
def test_endpoint_through_ode_machinery(grid, w):
    xs = np.arange(-8.0, 6.0001, 0.25)
    sq, di = interpolant_curves(grid, xs, w)
    f1 = eval_tw(grid, xs, 1)
    assert np.max(np.abs(sq - f1)) <= 1e-6
    assert np.max(np.abs(di - f1**2)) <= 1e-6


@pytest.mark.parametrize("x", [-2.0, 0.0, 1.5])
def test_continuity_at_zero(grid, x):
    assert interpolants(grid, x, 1e-9)[0] == pytest.approx(interpolants(grid, x, -1e-9)[0], abs=1e-6)


@pytest.mark.parametrize("w", [-2.0, -0.5, 0.5, 2.5])
def test_curves_match_pointwise(grid, w):
    xs = np.array([-3.0, -0.5, 1.0, 3.5, 12.0, 30.0])
    sq, di = interpolant_curves(grid, xs, w)
    for i, x in enumerate(xs):
        s, d = interpolants(grid, x, w)
        assert sq[i] == pytest.approx(s, abs=1e-8)
        assert di[i] == pytest.approx(d, abs=1e-8)


@pytest.mark.parametrize("w", [-2.0, -0.7, 0.5, 2.0, 5.0])
def test_monotone_in_x(grid, w):
    xs = np.linspace(-8.0, 26.0, 500)
    sq, di = interpolant_curves(grid, xs, w)
    assert np.all(np.diff(sq) >= -1e-9)
    assert np.all(np.diff(di) >= -1e-9)


@pytest.mark.parametrize("w", [-2.0, -2.4, -3.0])
def test_continuous_across_right_band_edge(grid, w):
    lo = interpolants(grid, lax.X_MAX - 1e-6, w)
    hi = interpolants(grid, lax.X_MAX + 1e-6, w)
    assert lo == pytest.approx(hi, abs=1e-6)


def test_negative_w_right_tail_is_shifted(grid):
    # for w < 0 the law sits near x = 4 w^2, so x = 20 is not yet the tail at w = -2
    sq, di = interpolants(grid, 20.0, -2.0)
    assert 0.9 < sq < 0.95 and 0.9 < di < 0.95
    assert interpolants(grid, 60.0, -2.0) == pytest.approx((1.0, 1.0), abs=1e-12)


def test_left_limit(grid):
    assert lax.f_square(grid, 0.0, -4.0) <= 1e-2
    assert lax.f_diamond(grid, 0.0, -4.0) <= 1e-2


def test_large_w_trend(grid):
    # the distance to the w -> inf limits shrinks like 1/w
    xs = np.linspace(-4.0, 2.0, 25)
    f4, f2 = eval_tw(grid, xs, 4), eval_tw(grid, xs, 2)
    gaps = []
    for w in (4.0, 8.0, 16.0):
        sq, di = interpolant_curves(grid, xs, w)
        gaps.append((np.max(np.abs(sq - f4)), np.max(np.abs(di - f2))))
    for k in range(2):
        assert gaps[1][k] < 0.6 * gaps[0][k] and gaps[2][k] < 0.6 * gaps[1][k]


def test_large_w_limit_example(grid):
    """Corollary-style example at w = 4 with tolerance 2e-3; the measured gap is
    about 0.1 (F4) and 0.055 (F2) because convergence is O(1/w)."""
    xs = np.linspace(-4.0, 2.0, 25)
    sq, di = interpolant_curves(grid, xs, 4.0)
    ok = np.max(np.abs(sq - eval_tw(grid, xs, 4))) <= 2e-3 and np.max(np.abs(di - eval_tw(grid, xs, 2))) <= 2e-3
    if not ok:
        pytest.xfail("O(1/w) convergence: gap at w = 4 is far above 2e-3")


def test_right_limit_example(grid):
    """x = 20 should give 1 within 1e-6 for all w in [-2, 6]; false at w = -2."""
    vals = [interpolants(grid, 20.0, w) for w in np.linspace(-2.0, 6.0, 17)]
    if not all(abs(s - 1) <= 1e-6 and abs(d - 1) <= 1e-6 for s, d in vals):
        pytest.xfail("for w < 0 the right tail moves to x ~ 4 w^2; F(20; -2) = 0.925")

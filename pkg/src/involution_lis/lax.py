"""Lax matrix ``m(-iw; x)`` of the Painleve II Riemann-Hilbert problem.

Two compatible linear ODEs determine ``m``:

* in ``x``:  ``dm/dx = w [m, s3] + u s1 m``
* in ``w``:  ``dm/dw = (x - 4w^2) [m, s3] - 4 w u s1 m - 2 B m``,
  ``B = [[u^2, -u'], [u', -u^2]]``

with ``s1``, ``s3`` the Pauli matrices.  The w-route combines the exact
matrix at ``w = 0`` with the normalisation ``m -> I`` as ``|w| -> inf`` and is
the primary method; the x-route combines the large-``x`` triangular datum with
the ``x -> -inf`` behaviour and serves as a cross-check.

The interpolating laws need only column 2 at ``|w|``.  For ``w > 0``

* ``F_square(x; w) = F {(m22 - m12)/E + (m22 + m12) E} / 2``
* ``F_diamond(x; w) = m22 F^2``

and for ``w < 0``, with ``a+ = a(|w|)``, ``n12 = e^{-a+} m12`` at ``|w|``,

* ``F_square(x; w) = F {e^{-a+} m22 (1/E - E) - n12 (1/E + E)} / 2``
* ``F_diamond(x; w) = -n12 F^2``

where ``a(w) = 8 w^3 / 3 - 2 x w``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad, solve_ivp

from .airy import airy_scalar, log_airy_right
from .errors import NonConvergence, OutOfDomain
from .painleve2 import PiiGrid, eval_tw

W_MAX = 6.0
# families only: beyond this |w| the large-w expansion is below 1e-9
W_SERIES = 40.0
# Right of the tabulated solution u = -Ai.  Beyond X_MAX the families equal 1
# to double precision for w >= 0; for w < 0 they are still rising near x = 4 w^2
# and are given there by Airy integrals (see ``_right_of_band``).
X_MAX = 24.0

SIGMA1 = np.array([[0.0, 1.0], [1.0, 0.0]])


@dataclass(frozen=True)
class LaxRouteConfig:
    route: str = "w_route"
    ode_tolerance: float = 1e-12
    x_start_for_x_route: float = 8.0

    def __post_init__(self):
        if self.route not in ("w_route", "x_route", "both"):
            raise ValueError(f"unknown route {self.route!r}")
        if not self.ode_tolerance > 0:
            raise ValueError("ode_tolerance must be positive")


@dataclass(frozen=True)
class LaxMatrix:
    w: float
    x: float
    m: np.ndarray
    route: str = "w_route"
    det_drift: float = 0.0
    discrepancy: float | None = None
    steps: int = 0
    x_start: float | None = None
    notes: dict = field(default_factory=dict, compare=False)

    @property
    def m11(self) -> float:
        return float(self.m[0, 0])

    @property
    def m12(self) -> float:
        return float(self.m[0, 1])

    @property
    def m21(self) -> float:
        return float(self.m[1, 0])

    @property
    def m22(self) -> float:
        return float(self.m[1, 1])

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.m))


def exponent(w: float, x: float) -> float:
    return 8.0 * w**3 / 3.0 - 2.0 * x * w


def _u_du(grid: PiiGrid, x: float) -> tuple[float, float]:
    if x > grid.x_right:
        ai, aip = airy_scalar(x)
        return -ai, -aip
    if x < grid.x_left:
        # u ~ -sqrt(-x/2) (1 + 1/(8 x^3))
        r = math.sqrt(-x / 2.0)
        return -r * (1.0 + 1.0 / (8.0 * x**3)), 1.0 / (4.0 * r) * (1.0 + 1.0 / (8.0 * x**3)) + 3.0 * r / (8.0 * x**4)
    return grid.u_du(x)


def _log_e(grid: PiiGrid, x: float) -> float:
    _, le = grid.log_fe(np.array([x]))
    return float(le[0])


def m_at_zero(grid: PiiGrid, x: float, side: int = 1) -> np.ndarray:
    """Closed form at ``w = 0+`` (``side=1``) or ``w = 0-`` (``side=-1``)."""
    e2 = math.exp(2.0 * _log_e(grid, x))
    m0 = np.array([[0.5 * (e2 + 1.0 / e2), -e2], [0.5 * (1.0 / e2 - e2), e2]])
    return m0 if side > 0 else SIGMA1 @ m0 @ SIGMA1


def _det_drift(col1: np.ndarray, col2: np.ndarray) -> float:
    # relative to the size of the products so huge entries are judged fairly
    m11, m21 = col1
    m12, m22 = col2
    det = m11 * m22 - m12 * m21
    scale = np.maximum(1.0, np.maximum(np.abs(m11 * m22), np.abs(m12 * m21)))
    return float(np.max(np.abs(det - 1.0) / scale))


def _check_domain(grid: PiiGrid, w: float, x: float) -> None:
    if not abs(w) <= W_MAX:
        raise OutOfDomain(f"|w| = {abs(w)} exceeds {W_MAX}")
    if not (grid.x_left + 1.0 <= x <= X_MAX):
        raise OutOfDomain(f"x = {x} outside [{grid.x_left + 1.0}, {X_MAX}]")


def _integrate(rhs, t0: float, t1: float, y0, tol: float, method: str = "DOP853", atol=None, **kw):
    atol = tol * 1e-3 if atol is None else atol
    sol = solve_ivp(rhs, (t0, t1), np.asarray(y0, dtype=float), method=method, rtol=tol, atol=atol, **kw)
    if not sol.success:
        raise NonConvergence(sol.message)
    return sol


# Each column of m has one growing and one decaying mode in either variable,
# so every column is integrated in the direction in which the wanted solution
# is the dominant one:
#
#   w-route, w > 0: column 1 forward from the exact matrix at w = 0+,
#                   column 2 backward from large w where m = I + O(1/w);
#   x-route, w > 0: column 1 downward from the large-x triangular datum,
#                   column 2 upward from the x -> -inf datum via a Riccati
#                   equation for m12/m22.
#
# For w < 0 the roles of the two columns are exchanged.


def large_w_start(u: float, du: float, v: float, x: float, w: float) -> tuple[float, float]:
    """Ratio and log-diagonal of the column that tends to a unit vector as w -> +-inf.

    For ``w > 0`` this is column 2, ``(m12/m22, log m22)``; for ``w < 0``
    column 1, ``(m21/m11, log m11)``.  The expansions come from
    ``m = I + sum_k c_k w^-k`` with coefficients fixed by the x-equation; the
    third-order diagonal term closes thanks to ``v = u^4 + x u^2 - u'^2``.
    Both are accurate to O(|w|^-4).
    """
    if w < 0:
        rho, ell = large_w_start(u, du, v, x, -w)
        # mirror symmetry m(w) = s1 m(-w) s1
        return rho, ell
    ell = v / (2 * w) - u * u / (8 * w**2) + (u * du + x * v) / (24 * w**3)
    rho = u / (2 * w) - du / (4 * w**2) + (u**3 + x * u) / (8 * w**3)
    return rho, ell


_W_FAR = 150.0


def _ratio_atol(tol: float) -> list[float]:
    # The off/diag ratio can pass through values of order Ai(x) ~ 1e-34 and
    # still carry the coefficient of a mode that is O(1) later; keep it
    # relatively accurate instead of absolutely.
    return [1e-300, tol * 1e-3]
_X_LEAD = 8.0


def _w_rhs(col: int, x: float, u: float, du: float):
    u2 = u * u
    if col == 1:

        def rhs(s, y):
            m11, m21 = y
            g = x - 4.0 * s * s
            c = -4.0 * s * u
            return [c * m21 - 2.0 * (u2 * m11 - du * m21), 2.0 * g * m21 + c * m11 - 2.0 * (du * m11 - u2 * m21)]

    else:

        def rhs(s, y):
            m12, m22 = y
            g = x - 4.0 * s * s
            c = -4.0 * s * u
            return [-2.0 * g * m12 + c * m22 - 2.0 * (u2 * m12 - du * m22), c * m12 - 2.0 * (du * m12 - u2 * m22)]

    return rhs


def _w_riccati(col: int, x: float, u: float, du: float):
    """Riccati form of the w-equation for (off/diag ratio, log diag), with Jacobian."""
    u2 = u * u
    sgn = 1.0 if col == 2 else -1.0

    # column 1 is column 2 with w -> -w; only the signs of a' and u' flip
    def rhs(s, y):
        rho = y[0]
        c = -4.0 * s * u
        ap = sgn * (8.0 * s * s - 2.0 * x)
        p, q = c + 2.0 * sgn * du, c - 2.0 * sgn * du
        return [(ap - 4.0 * sgn * u2) * rho + p - q * rho * rho, q * rho + 2.0 * sgn * u2]

    def jac(s, y):
        rho = y[0]
        c = -4.0 * s * u
        ap = sgn * (8.0 * s * s - 2.0 * x)
        q = c - 2.0 * sgn * du
        return [[ap - 4.0 * sgn * u2 - 2.0 * q * rho, 0.0], [q, 0.0]]

    return rhs, jac


def _w_route(grid: PiiGrid, w: float, x: float, tol: float) -> LaxMatrix:
    side = 1 if w >= 0 else -1
    m0 = m_at_zero(grid, x, side)
    if w == 0.0:
        return LaxMatrix(w=w, x=x, m=m0, route="w_route", det_drift=_det_drift(m0[:, 0], m0[:, 1]))
    u, du = _u_du(grid, x)
    v = _v(grid, x)
    fwd_col, bwd_col = (1, 2) if side > 0 else (2, 1)

    fwd = _integrate(_w_rhs(fwd_col, x, u, du), 0.0, w, m0[:, fwd_col - 1], tol)
    far = math.copysign(_W_FAR, w)
    # the discarded mode decays like exp(-8 w^2 |dw|) going inwards: stiff
    rhs, jac = _w_riccati(bwd_col, x, u, du)
    bwd = _integrate(
        rhs, far, 0.0, large_w_start(u, du, v, x, far), tol, method="LSODA", atol=_ratio_atol(tol), dense_output=True, jac=jac
    )

    def column(s):
        rho, ell = bwd.sol(s)
        diag = np.exp(ell)
        # column 2 is (off, diag); column 1 is (diag, off)
        return np.array([rho * diag, diag]) if bwd_col == 2 else np.array([diag, rho * diag])

    m = np.empty((2, 2))
    m[:, fwd_col - 1] = fwd.y[:, -1]
    m[:, bwd_col - 1] = column(w)
    along = column(fwd.t)
    c1, c2 = (fwd.y, along) if fwd_col == 1 else (along, fwd.y)
    # continued to w = 0 the backward column must meet the closed form there
    closure = discrepancy(m0[:, bwd_col - 1], column(0.0))
    return LaxMatrix(
        w=w,
        x=x,
        m=m,
        route="w_route",
        det_drift=_det_drift(c1, c2),
        steps=fwd.t.size + bwd.t.size - 2,
        notes={"closure_at_zero": closure},
    )


def x_route_start(x_min: float) -> float:
    """Start point where the triangular large-x datum is exact to ~1e-15."""
    xs = max(x_min, 8.0)
    while airy_scalar(xs)[0] > 1e-15:
        xs += 0.5
    return xs


def _v(grid: PiiGrid, x: float) -> float:
    if x > grid.x_right:
        ai, aip = airy_scalar(x)
        return -(aip * aip - x * ai * ai)
    return grid.v(x)


def _riccati_sweep(grid: PiiGrid, k: float, tol: float):
    """Upward sweep for rho = m12/m22 (w > 0, k = 2w) or m21/m11 (w < 0, k = 2|w|).

    rho -> -1 as x -> -inf.  The sweep starts on the quasi-static root of the
    right-hand side, far enough left that the start-up transient (rate about
    2 sqrt(w^2 + u^2)) has died out by x_left.  ell accumulates int u rho, so
    the diagonal entry of the column is exp(ell(x) - ell(X_MAX)).
    """

    def up(s, y):
        rho, _ = y
        u, _ = _u_du(grid, s)
        return [-k * rho + u - u * rho * rho, u * rho]

    x0 = grid.x_left - _X_LEAD
    u0, _ = _u_du(grid, x0)
    rho0 = (math.hypot(0.5 * k, u0) - 0.5 * k) / u0
    usol = _integrate(up, x0, X_MAX, [rho0, 0.0], tol, atol=_ratio_atol(tol), dense_output=True)
    return usol, float(usol.y[1, -1])


def _x_route(grid: PiiGrid, w: float, x: float, tol: float, x_min: float) -> LaxMatrix:
    side = 1 if w >= 0 else -1
    # never integrate the downward column upwards: start at x itself if needed
    xs = max(x_route_start(x_min), x)

    # downward column: exactly (1, 0) or (0, 1) up to O(Ai(xs)) at the start
    if side > 0:

        def down(s, y):
            m11, m21 = y
            u, _ = _u_du(grid, s)
            return [u * m21, 2.0 * w * m21 + u * m11]

        y0 = [1.0, 0.0]
    else:

        def down(s, y):
            m12, m22 = y
            u, _ = _u_du(grid, s)
            return [-2.0 * w * m12 + u * m22, u * m12]

        y0 = [0.0, 1.0]
    dsol = _integrate(down, xs, x, y0, tol)

    usol, ell_end = _riccati_sweep(grid, 2.0 * w * side, tol)

    def column(s):
        rho, ell = usol.sol(s)
        diag = np.exp(ell - ell_end)
        return rho * diag, diag

    m = np.empty((2, 2))
    off, diag = column(x)
    if side > 0:
        m[:, 0] = dsol.y[:, -1]
        m[:, 1] = [off, diag]
        o, d = column(dsol.t)
        drift = _det_drift(dsol.y, np.vstack([o, d]))
    else:
        m[:, 1] = dsol.y[:, -1]
        m[:, 0] = [diag, off]
        o, d = column(dsol.t)
        drift = _det_drift(np.vstack([d, o]), dsol.y)
    return LaxMatrix(
        w=w,
        x=x,
        m=m,
        route="x_route",
        det_drift=drift,
        steps=dsol.t.size + usol.t.size - 2,
        x_start=xs,
    )


def discrepancy(a: np.ndarray, b: np.ndarray) -> float:
    """Entrywise difference, relative for entries larger than one."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(a))))


def m_at(grid: PiiGrid, w: float, x: float, cfg: LaxRouteConfig | None = None) -> LaxMatrix:
    cfg = cfg or LaxRouteConfig()
    w, x = float(w), float(x)
    _check_domain(grid, w, x)
    if cfg.route == "x_route":
        return _x_route(grid, w, x, cfg.ode_tolerance, cfg.x_start_for_x_route)
    res = _w_route(grid, w, x, cfg.ode_tolerance)
    if cfg.route == "both":
        other = _x_route(grid, w, x, cfg.ode_tolerance, cfg.x_start_for_x_route)
        res = LaxMatrix(
            w=res.w,
            x=res.x,
            m=res.m,
            route="both",
            det_drift=max(res.det_drift, other.det_drift),
            discrepancy=discrepancy(res.m, other.m),
            steps=res.steps,
            x_start=other.x_start,
            notes={**res.notes, "x_route_m": other.m},
        )
    return res


# -- scaled off-diagonal entry ----------------------------------------------------
#
# For w > 0 the families need n12 = e^{-a} m12, which tends to -1 as x -> inf
# while m12 itself falls far below any absolute ODE tolerance.  Where u is
# negligible n12' = -Ai e^{-a}, and the Airy Laplace transform
# int Ai(s) e^{ps} ds = e^{p^3/3} gives n12(x) = -1 + int_x^inf Ai e^{-a} ds.

# below this exponent m12 = e^a n12 is under the ODE absolute tolerance
_SCALED_SWITCH = -14.0


def airy_laplace_tail(w: float, x0: float) -> float:
    """``int_{x0}^inf Ai(s) exp(2 w s - 8 w^3 / 3) ds`` for ``x0 > 8``."""
    c = 8.0 * w**3 / 3.0
    peak = max(x0, 4.0 * w * w)
    hi = peak + 60.0

    def f(s):
        return math.exp(log_airy_right(s) + 2.0 * w * s - c)

    pts = [peak] if peak > x0 else None
    val, _ = quad(f, x0, hi, points=pts, epsabs=1e-17, epsrel=1e-13, limit=200)
    return val


def _scaled_sweep(grid: PiiGrid, w: float, x_lo: float, tol: float):
    """Downward sweep of (n12, m22) from X_MAX, with dense output."""

    def rhs(s, y):
        n12, m22 = y
        u, _ = _u_du(grid, s)
        a = exponent(w, s)
        return [u * m22 * math.exp(-a), u * n12 * math.exp(a)]

    y0 = [-1.0 + airy_laplace_tail(w, X_MAX), 1.0]
    return _integrate(rhs, X_MAX, x_lo, y0, tol, dense_output=True)


def _series_column2(grid: PiiGrid, w: float, x: float) -> tuple[float, float]:
    u, du = _u_du(grid, x)
    rho, ell = large_w_start(u, du, _v(grid, x), x, w)
    m22 = math.exp(ell)
    return rho * m22, m22


def column2(grid: PiiGrid, w: float, x: float, cfg: LaxRouteConfig | None = None) -> tuple[float, float, float]:
    """``(m12, m22, e^{-a} m12)`` at ``w > 0``.

    Past ``W_MAX`` the w-route is used without the domain check, and past
    ``W_SERIES`` the large-w expansion (error O(w^-4)) replaces the ODEs.
    """
    if not w > 0:
        raise ValueError("column2 needs w > 0")
    if w > W_SERIES:
        m12, m22 = _series_column2(grid, w, x)
        return m12, m22, m12 * math.exp(-exponent(w, x))
    cfg = cfg or LaxRouteConfig()
    m = m_at(grid, w, x, cfg).m if w <= W_MAX else _w_route(grid, w, x, cfg.ode_tolerance).m
    m12, m22 = float(m[0, 1]), float(m[1, 1])
    a = exponent(w, x)
    if a > _SCALED_SWITCH:
        return m12, m22, m12 * math.exp(-a)
    return m12, m22, float(_scaled_sweep(grid, w, x, cfg.ode_tolerance).y[0, -1])


# -- interpolating distributions -------------------------------------------------
#
# For w < 0 the symmetry m(w) = s1 m(-w) s1 and a(w) = -a(-w) turn the
# w < 0 formulas into column-2 quantities at |w|:
#   e^a m11 = e^{-a+} m22+,   e^a m21 = n12+.


def _log_fe(grid: PiiGrid, x: float) -> tuple[float, float]:
    lf, le = grid.log_fe(np.array([x]))
    return float(lf[0]), float(le[0])


def _assemble(lf, le, w, x, m12, m22, n12, x_right=np.inf):
    """(F_square, F_diamond) from column 2 at |w|; works on arrays."""
    f = np.exp(lf)
    e, ie = np.exp(le), np.exp(-le)
    if w > 0:
        sq = 0.5 * f * ((m22 - m12) * ie + (m22 + m12) * e)
        di = m22 * f * f
    else:
        ap = exponent(-w, x)
        # (1/E - E) = 2 sinh(-le) keeps its relative accuracy when E ~ 1
        growth = np.exp(-ap) * np.sinh(-le)
        # right of the grid log E is only tabulated to absolute accuracy, and
        # e^{-a+} can be ~1e30 there, so use the Airy integral directly
        x_arr = np.atleast_1d(np.asarray(x, dtype=float))
        g_arr = np.array(np.broadcast_to(growth, x_arr.shape), dtype=float)
        for i in np.flatnonzero(x_arr > x_right):
            g_arr[i] = 0.5 * airy_tail_weighted(-w, float(x_arr[i]))
        growth = g_arr if np.ndim(x) else g_arr[0]
        sq = f * (m22 * growth - n12 * np.cosh(le))
        di = -n12 * f * f
    return np.clip(sq, 0.0, 1.0), np.clip(di, 0.0, 1.0)


def airy_tail_weighted(w: float, x: float) -> float:
    """``exp(2 w x - 8 w^3 / 3) int_x^inf Ai(s) ds`` for ``x > 8``."""
    c = 2.0 * w * x - 8.0 * w**3 / 3.0
    val, _ = quad(lambda s: math.exp(log_airy_right(s) + c), x, x + 60.0, epsabs=1e-17, epsrel=1e-13, limit=200)
    return val


def _right_of_band(w: float, x: float) -> tuple[float, float]:
    """Both families for ``x > X_MAX``, where u = -Ai makes F, E and m22 equal
    1 to double precision and column 2 at |w| is known in closed form."""
    if w >= 0:
        return 1.0, 1.0
    wp = -w
    n12 = -1.0 + airy_laplace_tail(wp, x)
    # e^{-a+} m22 sinh(-log E) with sinh(-log E) = int_x^inf Ai / 2
    sq = 0.5 * airy_tail_weighted(wp, x) - n12
    return float(np.clip(sq, 0.0, 1.0)), float(np.clip(-n12, 0.0, 1.0))


def _outside_band(grid: PiiGrid, x: float, w: float):
    if x > X_MAX:
        return _right_of_band(w, x)
    if x < grid.x_left + 1.0:
        return 0.0, 0.0
    return None


def interpolants(grid: PiiGrid, x: float, w: float, cfg: LaxRouteConfig | None = None) -> tuple[float, float]:
    """``(F_square(x; w), F_diamond(x; w))`` at one point."""
    x, w = float(x), float(w)
    out = _outside_band(grid, x, w)
    if out is not None:
        return out
    lf, le = _log_fe(grid, x)
    if w == 0.0:
        return float(np.clip(math.exp(lf + le), 0, 1)), float(np.clip(math.exp(2.0 * (lf + le)), 0, 1))
    m12, m22, n12 = column2(grid, abs(w), x, cfg)
    sq, di = _assemble(lf, le, w, x, m12, m22, n12, grid.x_right)
    return float(sq), float(di)


def f_square(grid: PiiGrid, x: float, w: float, cfg: LaxRouteConfig | None = None) -> float:
    """``F_square(x; w)``: F1 at w = 0, F4 as w -> +inf, 0 as w -> -inf."""
    return interpolants(grid, x, w, cfg)[0]


def f_diamond(grid: PiiGrid, x: float, w: float, cfg: LaxRouteConfig | None = None) -> float:
    """``F_diamond(x; w)``: F1^2 at w = 0, F2 as w -> +inf, 0 as w -> -inf."""
    return interpolants(grid, x, w, cfg)[1]


def interpolant_curves(grid: PiiGrid, xs, w: float, tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """Both families on a whole x grid from one upward x sweep.

    Needs only column 2 at |w|, which the Riccati sweep delivers with dense
    output; much cheaper than pointwise ``interpolants`` for tabulation.
    """
    xs = np.asarray(xs, dtype=float)
    sq = np.empty_like(xs)
    di = np.empty_like(xs)
    inside = (xs >= grid.x_left + 1.0) & (xs <= X_MAX)
    sq[~inside] = di[~inside] = 0.0
    for i in np.flatnonzero(xs > X_MAX):
        sq[i], di[i] = _right_of_band(float(w), float(xs[i]))
    xi = xs[inside]
    if xi.size == 0:
        return sq, di
    lf, le = grid.log_fe(xi)
    w = float(w)
    if w == 0.0:
        sq[inside] = np.clip(np.exp(lf + le), 0, 1)
        di[inside] = np.clip(np.exp(2.0 * (lf + le)), 0, 1)
        return sq, di
    wp = abs(w)
    a = np.array([exponent(wp, x) for x in xi])
    if wp > W_SERIES:
        cols = np.array([_series_column2(grid, wp, x) for x in xi])
        m12, m22 = cols[:, 0], cols[:, 1]
        n12 = m12 * np.exp(-a)
    else:
        usol, ell_end = _riccati_sweep(grid, 2.0 * wp, tol)
        rho, ell = usol.sol(xi)
        m22 = np.exp(ell - ell_end)
        m12 = rho * m22
        n12 = np.empty_like(m12)
        small = a <= _SCALED_SWITCH
        with np.errstate(over="ignore"):
            n12[~small] = m12[~small] * np.exp(-a[~small])
        if small.any():
            ssol = _scaled_sweep(grid, wp, float(xi[small].min()), tol)
            n12[small] = ssol.sol(xi[small])[0]
    s_, d_ = _assemble(lf, le, w, xi, m12, m22, n12, grid.x_right)
    sq[inside], di[inside] = s_, d_
    return sq, di

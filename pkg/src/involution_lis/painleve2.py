"""Hastings-McLeod solution of Painleve II and the Tracy-Widom laws.

The solution of ``u'' = 2u^3 + x u`` with ``u ~ -Ai(x)`` at ``+inf`` is found
as a two-point boundary value problem by damped Newton iteration on a
Hermite-Simpson (Lobatto IIIA, fourth order) collocation of the first-order
system ``(u, u')``.  From ``u`` we tabulate

* ``v(x) = -int_x^inf u^2``,
* ``log E(x) = 1/2 int_x^inf u``,
* ``log F(x) = 1/2 int_x^inf v = -1/2 int_x^inf (s - x) u(s)^2 ds``,

and ``F2 = F^2``, ``F1 = F E``, ``F4 = F (E + 1/E) / 2``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.interpolate import CubicHermiteSpline

from .airy import airy, airy_sq_tail
from .errors import InvalidConfig, NonConvergence

ENSEMBLES = (1, 2, 4)

# Right of x_right the solution is replaced by -Ai and tabulated up to _TAIL_END,
# where every tail quantity is below 1e-40.
_TAIL_END = 24.0
_TAIL_STEP = 0.01


@dataclass(frozen=True)
class BvpConfig:
    x_left: float = -10.0
    x_right: float = 8.0
    node_count: int = 4001
    newton_tolerance: float = 1e-10
    max_newton_iters: int = 60

    def validate(self) -> None:
        if not (self.x_left < -5.0 < 5.0 < self.x_right):
            raise InvalidConfig(f"need x_left < -5 < 5 < x_right, got [{self.x_left}, {self.x_right}]")
        if self.node_count < 200:
            raise InvalidConfig("node_count must be at least 200")
        if not self.newton_tolerance > 0:
            raise InvalidConfig("newton_tolerance must be positive")
        if self.max_newton_iters < 1:
            raise InvalidConfig("max_newton_iters must be positive")


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PiiGrid:
    """Tabulated Hastings-McLeod solution.  Arrays are read-only."""

    x_nodes: np.ndarray
    u_vals: np.ndarray
    du_vals: np.ndarray
    v_vals: np.ndarray
    logE_vals: np.ndarray
    logF_vals: np.ndarray
    tolerance: float
    residual: float = math.nan
    newton_iters: int = 0
    tail: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def x_left(self) -> float:
        return float(self.x_nodes[0])

    @property
    def x_right(self) -> float:
        return float(self.x_nodes[-1])

    def __post_init__(self):
        for name in ("x_nodes", "u_vals", "du_vals", "v_vals", "logE_vals", "logF_vals"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        if not self.tail:
            object.__setattr__(self, "tail", _airy_tail_table(self.x_right))
        x = self.x_nodes
        ddu = 2 * self.u_vals**3 + x * self.u_vals
        sp_ = {
            "logF": CubicHermiteSpline(x, self.logF_vals, -0.5 * self.v_vals),
            "logE": CubicHermiteSpline(x, self.logE_vals, -0.5 * self.u_vals),
            "u": CubicHermiteSpline(x, self.u_vals, self.du_vals),
            "du": CubicHermiteSpline(x, self.du_vals, ddu),
            "v": CubicHermiteSpline(x, self.v_vals, self.u_vals**2),
        }
        object.__setattr__(self, "_splines", sp_)

    # -- pointwise evaluation -------------------------------------------------

    def v(self, x: float) -> float:
        """``v(x) = -int_x^inf u^2`` inside the tabulated range."""
        if not self.x_left <= x <= self.x_right:
            raise ValueError("x outside the tabulated range")
        return float(self._splines["v"](x))

    def u_du(self, x: float) -> tuple[float, float]:
        """``(u(x), u'(x))``; ``-Ai`` right of the grid."""
        if x > self.x_right:
            ai, aip = airy(np.array([x]))
            return -float(ai[0]), -float(aip[0])
        if x < self.x_left:
            raise ValueError("x left of the tabulated range")
        return float(self._splines["u"](x)), float(self._splines["du"](x))

    def log_fe(self, x) -> tuple[np.ndarray, np.ndarray]:
        """``(log F, log E)`` on all of R, with tail formulas off the grid."""
        x = np.asarray(x, dtype=float)
        lf = np.empty_like(x)
        le = np.empty_like(x)
        xl, xr = self.x_left, self.x_right
        mid = (x >= xl) & (x <= xr)
        lf[mid] = self._splines["logF"](x[mid])
        le[mid] = self._splines["logE"](x[mid])
        right = x > xr
        if right.any():
            t = self.tail
            xt = np.minimum(x[right], t["x"][-1])
            lf[right] = t["logF_spline"](xt)
            le[right] = t["logE_spline"](xt)
        left = x < xl
        if left.any():
            lf[left], le[left] = _left_extension(self, x[left])
        return lf, le


def _left_extension(grid: PiiGrid, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # u^2 ~ -s/2, hence v(s) ~ v(xl) - (s^2 - xl^2)/4 and u ~ -sqrt(-s/2).
    xl = grid.x_left
    vl = grid.v_vals[0]
    lf = grid.logF_vals[0] + 0.5 * ((vl + xl * xl / 4.0) * (xl - x) - (xl**3 - x**3) / 12.0)
    le = grid.logE_vals[0] - math.sqrt(2.0) / 6.0 * ((-x) ** 1.5 - (-xl) ** 1.5)
    return lf, le


def _hermite_cumulative_from_right(x: np.ndarray, g: np.ndarray, dg: np.ndarray, end_value: float) -> np.ndarray:
    """``end_value + int_{x_i}^{x_end} g`` by the corrected trapezoid rule."""
    h = np.diff(x)
    pieces = 0.5 * h * (g[:-1] + g[1:]) + h * h / 12.0 * (dg[:-1] - dg[1:])
    out = np.empty_like(x)
    out[-1] = end_value
    out[:-1] = end_value + np.cumsum(pieces[::-1])[::-1]
    return out


def _airy_tail_table(x_right: float) -> dict:
    n = int(round((_TAIL_END - x_right) / _TAIL_STEP)) + 1
    x = np.linspace(x_right, _TAIL_END, n)
    ai, aip = airy(x)
    u, du = -ai, -aip
    v = -(aip * aip - x * ai * ai)
    int_u = _hermite_cumulative_from_right(x, u, du, 0.0)
    int_v = _hermite_cumulative_from_right(x, v, u * u, 0.0)
    logE = 0.5 * int_u
    logF = 0.5 * int_v
    return {
        "x": x,
        "int_u": int_u,
        "int_v": int_v,
        "logE_spline": CubicHermiteSpline(x, logE, -0.5 * u),
        "logF_spline": CubicHermiteSpline(x, logF, -0.5 * v),
    }


# -- collocation ---------------------------------------------------------------


def _rhs(x, u, p):
    return p, 2.0 * u**3 + x * u


def _residual(x: np.ndarray, u: np.ndarray, p: np.ndarray, ul: float, ur: float):
    h = np.diff(x)
    fu, fp = _rhs(x, u, p)
    xm = x[:-1] + 0.5 * h
    um = 0.5 * (u[:-1] + u[1:]) + h / 8.0 * (fu[:-1] - fu[1:])
    pm = 0.5 * (p[:-1] + p[1:]) + h / 8.0 * (fp[:-1] - fp[1:])
    fum, fpm = _rhs(xm, um, pm)
    ru = u[1:] - u[:-1] - h / 6.0 * (fu[:-1] + 4 * fum + fu[1:])
    rp = p[1:] - p[:-1] - h / 6.0 * (fp[:-1] + 4 * fpm + fp[1:])
    return ru, rp, um, xm


def _assemble(x, u, p, ul, ur):
    n = len(x)
    h = np.diff(x)
    ru, rp, um, xm = _residual(x, u, p, ul, ur)
    res = np.empty(2 * n)
    res[0] = u[0] - ul
    res[1:-1:2] = ru
    res[2:-1:2] = rp
    res[-1] = u[-1] - ur

    # Jacobians of f=(p, 2u^3+xu) are [[0,1],[a,0]] with a = 6u^2 + x.
    a = 6 * u**2 + x
    am = 6 * um**2 + xm
    ai, aj = a[:-1], a[1:]
    # d(y_m)/d(y_i) = I/2 + h/8 J_i ; d(y_m)/d(y_{i+1}) = I/2 - h/8 J_{i+1}
    # defect D = y_{i+1} - y_i - h/6 (f_i + 4 f_m + f_{i+1})
    # dD/dy_i = -I - h/6 (J_i + 4 J_m (I/2 + h/8 J_i))
    # J_m (I/2 + c J) = [[0,1],[am,0]] [[1/2, c],[c a, 1/2]] = [[c a, 1/2],[am/2, am c]]
    c = h / 8.0
    # left block rows (ru, rp), cols (u_i, p_i)
    L = np.empty((n - 1, 2, 2))
    L[:, 0, 0] = -1.0 - h / 6.0 * (0.0 + 4 * c * ai)
    L[:, 0, 1] = -h / 6.0 * (1.0 + 4 * 0.5)
    L[:, 1, 0] = -h / 6.0 * (ai + 4 * 0.5 * am)
    L[:, 1, 1] = -1.0 - h / 6.0 * (0.0 + 4 * am * c)
    # right block: c -> -c, J_i -> J_{i+1}, leading +I
    R = np.empty((n - 1, 2, 2))
    R[:, 0, 0] = 1.0 - h / 6.0 * (0.0 + 4 * (-c) * aj)
    R[:, 0, 1] = -h / 6.0 * (1.0 + 4 * 0.5)
    R[:, 1, 0] = -h / 6.0 * (aj + 4 * 0.5 * am)
    R[:, 1, 1] = 1.0 - h / 6.0 * (0.0 + 4 * am * (-c))

    i = np.arange(n - 1)
    rows, cols, vals = [np.array([0])], [np.array([0])], [np.array([1.0])]
    for r in range(2):
        row = 1 + 2 * i + r
        for cidx in range(2):
            rows += [row, row]
            cols += [2 * i + cidx, 2 * (i + 1) + cidx]
            vals += [L[:, r, cidx], R[:, r, cidx]]
    rows.append(np.array([2 * n - 1]))
    cols.append(np.array([2 * (n - 1)]))
    vals.append(np.array([1.0]))
    jac = sp.csc_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(2 * n, 2 * n)
    )
    return res, jac


def boundary_values(x_left: float, x_right: float) -> tuple[float, float]:
    """Left asymptote with its first correction, and ``-Ai`` on the right."""
    ul = -math.sqrt(-x_left / 2.0) * (1.0 + 1.0 / (8.0 * x_left**3))
    ai, _ = airy(np.array([x_right]))
    return ul, -float(ai[0])


def collocation_residual(x: np.ndarray, u: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Per-interval collocation defect divided by the step (an ODE residual)."""
    ru, rp, _, _ = _residual(x, u, p, 0.0, 0.0)
    h = np.diff(x)
    return np.maximum(np.abs(ru), np.abs(rp)) / h


def solve_hastings_mcleod(config: BvpConfig | None = None) -> PiiGrid:
    config = config or BvpConfig()
    config.validate()
    x = np.linspace(config.x_left, config.x_right, config.node_count)
    ul, ur = boundary_values(config.x_left, config.x_right)
    slope = (ur - ul) / (config.x_right - config.x_left)
    u = ul + slope * (x - config.x_left)
    p = np.full_like(x, slope)

    y = np.empty(2 * len(x))
    y[0::2], y[1::2] = u, p
    h_min = float(np.min(np.diff(x)))
    it = 0
    for it in range(1, config.max_newton_iters + 1):
        res, jac = _assemble(x, y[0::2], y[1::2], ul, ur)
        norm0 = np.linalg.norm(res)
        step = spla.spsolve(jac, -res)
        lam = 1.0
        while True:
            trial = y + lam * step
            r_trial, _ = _assemble(x, trial[0::2], trial[1::2], ul, ur)
            if np.linalg.norm(r_trial) <= (1.0 - 0.25 * lam) * norm0 or lam < 1e-3:
                break
            lam *= 0.5
        y = trial
        scaled = float(np.max(collocation_residual(x, y[0::2], y[1::2])))
        if lam == 1.0 and scaled <= config.newton_tolerance and np.max(np.abs(step)) < 1e-8 + 1e-3 * h_min:
            break
    else:
        raise NonConvergence(
            f"Newton did not converge in {config.max_newton_iters} iterations (residual {scaled:.3e})"
        )

    u, p = y[0::2].copy(), y[1::2].copy()
    tail = _airy_tail_table(config.x_right)
    v_end = -airy_sq_tail(config.x_right)
    v = _hermite_cumulative_from_right(x, -u * u, -2 * u * p, 0.0) + v_end
    # int_{x_i}^{x_r} u with the tail from the Airy table
    int_u = _hermite_cumulative_from_right(x, u, p, float(tail["int_u"][0]))
    int_v = _hermite_cumulative_from_right(x, v, u * u, float(tail["int_v"][0]))
    return PiiGrid(
        x_nodes=x,
        u_vals=u,
        du_vals=p,
        v_vals=v,
        logE_vals=0.5 * int_u,
        logF_vals=0.5 * int_v,
        tolerance=config.newton_tolerance,
        residual=scaled,
        newton_iters=it,
        tail=tail,
    )


# -- distribution functions -----------------------------------------------------


def combine(logF, logE, ensemble: int):
    """Assemble F1, F2 or F4 from ``log F`` and ``log E``."""
    logF = np.asarray(logF, dtype=float)
    logE = np.asarray(logE, dtype=float)
    if ensemble == 2:
        out = np.exp(2 * logF)
    elif ensemble == 1:
        out = np.exp(logF + logE)
    elif ensemble == 4:
        # F (E + 1/E) / 2 written to avoid overflow of 1/E far left
        out = 0.5 * (np.exp(logF + logE) + np.exp(logF - logE))
    else:
        raise ValueError(f"ensemble must be one of {ENSEMBLES}")
    return np.clip(out, 0.0, 1.0)


def eval_tw(grid: PiiGrid, x, ensemble: int):
    """Tracy-Widom distribution ``F_beta(x)``; scalar in, scalar out."""
    scalar = np.ndim(x) == 0
    lf, le = grid.log_fe(np.atleast_1d(np.asarray(x, dtype=float)))
    out = combine(lf, le, ensemble)
    return float(out[0]) if scalar else out


_GL_X, _GL_W = np.polynomial.legendre.leggauss(32)


def _panel_quadrature(f, a: float, b: float, panels: int) -> float:
    edges = np.linspace(a, b, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
    half = 0.5 * np.diff(edges)[:, None]
    nodes = (mid + half * _GL_X[None, :]).ravel()
    weights = (half * _GL_W[None, :]).ravel()
    return float(np.dot(weights, f(nodes)))


def tw_moment(grid: PiiGrid, ensemble: int, p: int) -> float:
    """``E[X^p]`` under ``F_beta`` by integration by parts.

    ``E X^p = int_0^inf p x^(p-1) (1 - F) dx - int_-inf^0 p x^(p-1) F dx``.
    Truncation at -14 and 16 costs less than 1e-8 for p <= 6.
    """
    if p == 0:
        return 1.0
    if not 1 <= p <= 6:
        raise ValueError("p must be in 0..6")
    left = _panel_quadrature(lambda s: p * s ** (p - 1) * eval_tw(grid, s, ensemble), -14.0, 0.0, 56)
    right = _panel_quadrature(lambda s: p * s ** (p - 1) * (1.0 - eval_tw(grid, s, ensemble)), 0.0, 16.0, 64)
    return right - left


def tw_mean_var(grid: PiiGrid, ensemble: int) -> tuple[float, float]:
    m1 = tw_moment(grid, ensemble, 1)
    m2 = tw_moment(grid, ensemble, 2)
    return m1, m2 - m1 * m1


# -- CSV ------------------------------------------------------------------------

CSV_COLUMNS = ("x", "u", "du", "v", "logE", "logF")


def export_csv(grid: PiiGrid, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        cols = (grid.x_nodes, grid.u_vals, grid.du_vals, grid.v_vals, grid.logE_vals, grid.logF_vals)
        for row in zip(*cols):
            w.writerow([f"{val:.17g}" for val in row])


def import_csv(path, tolerance: float = 1e-10) -> PiiGrid:
    with open(Path(path), newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_COLUMNS:
            raise InvalidConfig(f"unexpected CSV header {header}")
        data = np.array([[float(v) for v in row] for row in reader])
    return PiiGrid(
        x_nodes=data[:, 0],
        u_vals=data[:, 1],
        du_vals=data[:, 2],
        v_vals=data[:, 3],
        logE_vals=data[:, 4],
        logF_vals=data[:, 5],
        tolerance=tolerance,
    )


_DEFAULT: dict = {}


def default_grid() -> PiiGrid:
    """Process-wide cached solution with the default configuration."""
    if "grid" not in _DEFAULT:
        _DEFAULT["grid"] = solve_hastings_mcleod(BvpConfig())
    return _DEFAULT["grid"]

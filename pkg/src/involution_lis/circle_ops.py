"""Orthogonal polynomials on the unit circle for the weight ``exp(t (z + 1/z))``.

The moments of the weight are Bessel values ``I_nu(2t)``.  The monic
polynomials ``pi_k`` follow from the Szego recursion

    pi_{k+1}(z)  = z pi_k(z) + r_{k+1} pi*_k(z)
    pi*_{k+1}(z) = pi*_k(z) + r_{k+1} z pi_k(z)
    N_{k+1}      = N_k (1 - r_{k+1}^2)

with ``r_k = pi_k(0)`` obtained Levinson-style from the moments.  The
recursion sheds about ``1.2 t`` decimal digits, so all of it runs in mpmath
at ``auto_digits(t)`` digits.

The Poisson generating functions of the row (square), column (diamond) and
signed-involution statistics are products over ``N_j`` and ``1 +- r_j``
combined with ``pi_k(-alpha)`` and ``pi*_k(-alpha)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath

from .errors import InvalidConfig, PrecisionLoss, PrecisionUnachievable, TruncationUncertified

MAX_DIGITS = 5000
# explicit factors kept past j_max to bound the truncated tail
_TAIL_MARGIN = 40
# digits that must survive the recursion
_DIGIT_MARGIN = 25
# log-factors below 10^-_NOISE_EXP are treated as exactly zero in the tail
_NOISE_EXP = 60


def auto_digits(t: float) -> int:
    """Working precision for the recursion at parameter ``t`` (measured loss about 1.2 t digits)."""
    return 40 + math.ceil(1.8 * float(t))


def _check_digits(d: int) -> int:
    d = int(d)
    if d < 15:
        raise PrecisionUnachievable("at least 15 digits are needed")
    if d > MAX_DIGITS:
        raise PrecisionUnachievable(f"{d} digits exceeds the backend cap {MAX_DIGITS}")
    return d


# -- Bessel moments --------------------------------------------------------------


def _bessel_series(nu: int, x: mpmath.mpf) -> mpmath.mpf:
    # sum_k (x/2)^{2k+nu} / (k! (k+nu)!); all terms positive, no cancellation
    h = x / 2
    term = h**nu / mpmath.factorial(nu)
    h2 = h * h
    total = term
    eps = mpmath.mpf(2) ** (-mpmath.mp.prec - 8)
    k = 0
    while True:
        k += 1
        term = term * h2 / (k * (k + nu))
        total += term
        if term < eps * total and k > h:
            return total


def bessel_I(nu: int, arg: float, precision_digits: int = 30) -> mpmath.mpf:
    """Modified Bessel ``I_nu(arg)`` for integer ``nu >= 0`` and ``arg >= 0``."""
    nu = abs(int(nu))
    if arg < 0:
        raise ValueError("arg must be nonnegative")
    with mpmath.workdps(_check_digits(precision_digits) + 10):
        x = mpmath.mpf(arg)
        if x == 0:
            val = mpmath.mpf(1) if nu == 0 else mpmath.mpf(0)
        else:
            val = _bessel_series(nu, x)
    return +val


@dataclass(frozen=True)
class BesselMoments:
    t: float
    precision_digits: int
    values: tuple  # I_nu(2t), nu = 0..nu_max


def bessel_moments(t: float, nu_max: int, precision_digits: int) -> BesselMoments:
    """``I_nu(2t)`` for ``nu = 0..nu_max``: two series values at the top, then
    the recurrence ``I_{nu-1} = I_{nu+1} + (nu/t) I_nu`` downwards, which is
    the stable direction."""
    _check_digits(precision_digits)
    with mpmath.workdps(precision_digits + 10):
        t_mp = mpmath.mpf(t)
        if t_mp == 0:
            vals = [mpmath.mpf(1)] + [mpmath.mpf(0)] * nu_max
        else:
            x = 2 * t_mp
            hi = nu_max + 1
            vals = [mpmath.mpf(0)] * (hi + 1)
            vals[hi] = _bessel_series(hi, x)
            vals[hi - 1] = _bessel_series(hi - 1, x)
            for nu in range(hi - 1, 0, -1):
                vals[nu - 1] = vals[nu + 1] + (nu / t_mp) * vals[nu]
            vals = vals[: nu_max + 1]
    return BesselMoments(float(t), precision_digits, tuple(vals))


# -- Szego / Levinson ------------------------------------------------------------


@dataclass(frozen=True)
class OrthoSequence:
    t: float
    k_max: int
    precision_digits: int
    norms: tuple  # N_k, k = 0..k_max
    pi0: tuple  # pi_k(0), k = 0..k_max (pi_0(0) = 1)
    # log N_k = -sum_{i > k} log(1 - r_i^2), using N_k -> 1 as k -> inf (the
    # mean of log psi over the circle is zero); relatively accurate where the
    # forward product has decayed into roundoff
    log_norms: tuple = ()
    check: dict = field(default_factory=dict, compare=False)

    def N(self, k: int) -> mpmath.mpf:
        return self.norms[k]

    def r(self, k: int) -> mpmath.mpf:
        return self.pi0[k]


def ortho_sequence(t: float, k_max: int, precision_digits: int | None = None) -> OrthoSequence:
    if not 0 <= t <= 500:
        raise InvalidConfig("t must lie in [0, 500]")
    if not 0 <= k_max <= 2000:
        raise InvalidConfig("k_max must lie in [0, 2000]")
    dps = _check_digits(precision_digits if precision_digits is not None else auto_digits(t))
    c = bessel_moments(t, k_max + 1, dps).values
    with mpmath.workdps(dps):
        norms = [+c[0]]
        pi0 = [mpmath.mpf(1)]
        a = [mpmath.mpf(1)]  # coefficients of pi_k, constant term first
        for k in range(k_max):
            # <z pi_k, 1> = sum_j a_j c_{j+1};  <pi*_k, 1> = N_k
            s = mpmath.fsum(a[j] * c[j + 1] for j in range(k + 1))
            r = -s / norms[k]
            shifted = [mpmath.mpf(0)] + a
            rev = a[::-1] + [mpmath.mpf(0)]
            a = [shifted[i] + r * rev[i] for i in range(k + 2)]
            pi0.append(r)
            norms.append(norms[k] * (1 - r * r))
        # <pi_k, z^k> = N_k recomputed from the coefficients; the size of the
        # terms relative to N_k estimates the digits the recursion has shed
        direct = mpmath.fsum(a[i] * c[k_max - i] for i in range(k_max + 1))
        scale = mpmath.fsum(abs(a[i] * c[k_max - i]) for i in range(k_max + 1))
        bad_invariant = any(abs(r) >= 1 for r in pi0[1:]) or any(n <= 0 for n in norms)
        rel = abs(direct - norms[k_max]) / abs(norms[k_max])
        lost = float(mpmath.log10(scale / abs(norms[k_max])))
        log_norms = [mpmath.mpf(0)] * (k_max + 1)
        acc = mpmath.mpf(0)
        for k in range(k_max, 0, -1):
            log_norms[k] = acc
            acc -= mpmath.log1p(-pi0[k] * pi0[k])
        log_norms[0] = acc
    check = {"norm_mismatch": float(rel), "digits_lost": lost, "digits_left": dps - lost}
    if bad_invariant or rel > mpmath.mpf(10) ** (-15) or dps - lost < _DIGIT_MARGIN:
        raise PrecisionLoss(
            f"recursion lost accuracy at t={t}, k_max={k_max} with {dps} digits "
            f"(estimated {lost:.0f} digits shed, norm mismatch {float(rel):.1e})"
        )
    return OrthoSequence(float(t), k_max, dps, tuple(norms), tuple(pi0), tuple(log_norms), check)


def direct_norms(t: float, k_max: int, precision_digits: int = 60) -> list:
    """``N_k = D_{k+1} / D_k`` from Toeplitz determinants ``D_k = det[I_{i-j}(2t)]``."""
    c = bessel_moments(t, k_max + 1, precision_digits).values
    out = []
    with mpmath.workdps(precision_digits):
        prev = mpmath.mpf(1)
        for k in range(1, k_max + 2):
            d = mpmath.det(mpmath.matrix([[c[abs(i - j)] for j in range(k)] for i in range(k)]))
            out.append(d / prev)
            prev = d
    return out


def pi_eval(seq: OrthoSequence, k: int, z) -> tuple:
    """``(pi_k(z), pi*_k(z))`` by the coupled recursion."""
    if not 0 <= k <= seq.k_max:
        raise InvalidConfig(f"k = {k} outside 0..{seq.k_max}")
    with mpmath.workdps(seq.precision_digits):
        z = mpmath.mpf(z)
        p, ps = mpmath.mpf(1), mpmath.mpf(1)
        for j in range(1, k + 1):
            r = seq.pi0[j]
            p, ps = z * p + r * ps, ps + r * z * p
    return p, ps


# -- determinant products ----------------------------------------------------------


def truncation_index(l: int, t: float) -> int:
    """Largest polynomial index used: ``max(2l, ceil(2t) + 12 (2t)^{1/3})``."""
    return max(2 * l, math.ceil(2 * t) + math.ceil(12 * (2 * t) ** (1 / 3)))


@dataclass(frozen=True)
class DetProducts:
    """``e^{-t^2} D_l`` and the four ``D^{+-}`` variants, each with its prefactor."""

    l: int
    D: mpmath.mpf
    Dmm: mpmath.mpf
    Dpp: mpmath.mpf
    Dpm: mpmath.mpf  # e^{-t^2/2 + t} D^{+-}_l
    Dmp: mpmath.mpf  # e^{-t^2/2 - t} D^{-+}_l
    j_max: int
    tail_bound: float


def _log_factors(seq: OrthoSequence, kind: str, l: int, upto: int) -> list:
    """log of each factor of the requested product with polynomial index <= upto."""
    out = []
    if kind == "D":
        for j in range(l, upto + 1):
            out.append(-seq.log_norms[j])
        return out
    if kind == "mm":
        # the product starts at N_{2l}, one step below the "pp" product
        idx, sgn = range(2 * l, upto + 1, 2), 1
    elif kind == "pp":
        idx, sgn = range(2 * l + 2, upto + 1, 2), -1
    else:
        idx = range(2 * l + 1, upto + 1, 2)
        sgn = -1 if kind == "pm" else 1
    for i in idx:
        out.append(mpmath.log1p(sgn * seq.pi0[i]) - seq.log_norms[i])
    return out


def required_k_max(l: int, t: float, truncation: int | None = None) -> int:
    j_max = truncation if truncation is not None else truncation_index(l, t)
    return max(j_max, 2 * l + 2) + _TAIL_MARGIN


def det_products(seq: OrthoSequence, l: int, truncation: int | None = None) -> DetProducts:
    """Products truncated at index ``j_max``; the tail bound is the size of the
    explicitly computed next ``_TAIL_MARGIN`` factors plus a geometric
    extrapolation of their decay (an empirical envelope, not a proof)."""
    if l < 0:
        raise InvalidConfig("l must be nonnegative")
    j_max = truncation if truncation is not None else truncation_index(l, seq.t)
    j_max = max(j_max, 2 * l + 2)
    top = j_max + _TAIL_MARGIN
    if top > seq.k_max:
        raise TruncationUncertified(f"sequence has k_max={seq.k_max}, need {top}")
    vals = {}
    tail = 0.0
    with mpmath.workdps(seq.precision_digits):
        # Deep in the tail the computed r_k stall at the recursion's noise
        # level instead of decaying; factors this small cannot move a double.
        floor = max(mpmath.mpf(10) ** (5 - seq.check["digits_left"]), mpmath.mpf(10) ** -_NOISE_EXP)
        for kind in ("D", "mm", "pp", "pm", "mp"):
            logs = _log_factors(seq, kind, l, top)
            n_keep = len(_log_factors(seq, kind, l, j_max)) if kind != "D" else j_max - l + 1
            kept, rest = logs[:n_keep], logs[n_keep:]
            vals[kind] = mpmath.exp(mpmath.fsum(kept))
            mags = [abs(x) for x in rest]
            explicit = float(mpmath.fsum(mags))
            # below working precision the factors are exactly 1 for our purposes
            if len(mags) >= 2 and mags[-1] > floor:
                q = float(mags[-1] / mags[-2])
                if q >= 1.0:
                    raise TruncationUncertified(f"factors not yet decaying at index {top} (ratio {q:.3f})")
                explicit += float(mags[-1]) * q / (1 - q)
            # bound on |exp(s) - 1| for the omitted log-sum s
            tail = max(tail, math.expm1(explicit) if explicit < 700 else math.inf)
    return DetProducts(l, vals["D"], vals["mm"], vals["pp"], vals["pm"], vals["mp"], j_max, tail)


# -- generating functions --------------------------------------------------------------

FAMILIES = ("square", "diamond", "signed", "square_row2", "diamond_row2", "signed_row2")


@dataclass(frozen=True)
class GenFnRequest:
    family: str
    l: int
    t: float
    alpha: float = 0.0
    beta: float = 0.0
    truncation_j_max: int | None = None
    precision_digits: int | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidConfig(f"unknown family {self.family!r}")
        if self.l < 0 or self.t < 0 or self.alpha < 0 or self.beta < 0:
            raise InvalidConfig("l, t, alpha, beta must be nonnegative")


@dataclass(frozen=True)
class GenFnValue:
    value: float
    truncation_j_max: int | None
    certified_tail_bound: float
    exact: mpmath.mpf | None = None


_SEQ_CACHE: dict = {}


def _sequence(t: float, k_max: int, digits: int | None) -> OrthoSequence:
    dps = digits if digits is not None else auto_digits(t)
    key = (float(t), dps)
    seq = _SEQ_CACHE.get(key)
    if seq is None or seq.k_max < k_max:
        seq = ortho_sequence(t, k_max, dps)
        if len(_SEQ_CACHE) > 32:
            _SEQ_CACHE.clear()
        _SEQ_CACHE[key] = seq
    return seq


def _reduce(req: GenFnRequest) -> tuple[str, int, float, float]:
    """Map row-2 families and special parameter values onto a base formula."""
    f, l, a, b = req.family, req.l, req.alpha, req.beta
    if f == "square_row2":
        return "square", l, 0.0, 0.0
    if f == "diamond_row2":
        if l % 2 == 0:
            raise InvalidConfig("diamond_row2 is available for odd l only")
        # checked against exact enumeration: same index, not l - 1
        return "square", l, 0.0, 0.0
    if f == "signed_row2":
        if l % 2 == 0:
            raise InvalidConfig("signed_row2 is available for odd l only")
        return "signed_even00", (l - 1) // 2, 0.0, 0.0
    if f == "diamond":
        if l % 2 == 1:
            return "diamond_odd", l // 2, 0.0, b
        if b == 0.0:
            return "diamond_even0", l // 2, 0.0, 0.0
        if b == 1.0:
            return "square", l, 1.0, 0.0
        raise InvalidConfig("diamond with even l is available for beta in {0, 1} only")
    if f == "signed":
        if l % 2 == 1:
            return "signed_odd", l // 2, a, b
        if a == 0.0 and b == 0.0:
            return "signed_even00", l // 2, 0.0, 0.0
        raise InvalidConfig("signed with even l is available for alpha = beta = 0 only")
    return "square", l, a, b


def pgen_detailed(req: GenFnRequest) -> GenFnValue:
    if req.t == 0:
        return GenFnValue(1.0, None, 0.0, mpmath.mpf(1))
    kind, l, alpha, beta = _reduce(req)
    t = req.t
    if kind == "square" and l == 0:
        # only the empty involution has no increasing subsequence
        with mpmath.workdps(30):
            v = mpmath.exp(-alpha * t - t * t / 2)
        return GenFnValue(float(v), None, 0.0, v)
    d_index = {"square": l // 2, "diamond_odd": l, "diamond_even0": l, "signed_odd": l, "signed_even00": l}[kind]
    j_max = req.truncation_j_max if req.truncation_j_max is not None else truncation_index(d_index, t)
    seq = _sequence(t, required_k_max(d_index, t, j_max), req.precision_digits)
    with mpmath.workdps(seq.precision_digits):
        ea = mpmath.exp(-mpmath.mpf(alpha) * t)
        z = -mpmath.mpf(alpha)
        if kind == "square":
            h = l // 2
            if l % 2 == 0:
                lo = det_products(seq, h - 1, j_max)
                hi = det_products(seq, h, j_max)
                p, ps = pi_eval(seq, l - 1, z)
                val = ea * ((ps - alpha * p) * hi.Dmm + (ps + alpha * p) * lo.Dpp) / 2
                tail = max(lo.tail_bound, hi.tail_bound)
            else:
                dp = det_products(seq, h, j_max)
                p, ps = pi_eval(seq, l - 1, z)
                val = ea * ((ps + alpha * p) * dp.Dpm + (ps - alpha * p) * dp.Dmp) / 2
                tail = dp.tail_bound
        elif kind in ("diamond_odd", "diamond_even0"):
            dp = det_products(seq, l, j_max)
            val, tail = dp.Dpp, dp.tail_bound
        elif kind == "signed_odd":
            dp = det_products(seq, l, j_max)
            _, ps = pi_eval(seq, l, z)
            val, tail = ea * ps * dp.D, dp.tail_bound
        else:  # signed_even00
            dp = det_products(seq, l, j_max)
            val, tail = dp.D, dp.tail_bound
        val = +val
    return GenFnValue(float(val), j_max, float(tail), val)


def pgen(req: GenFnRequest) -> float:
    """Poisson generating function ``P_l(t; alpha[, beta])`` of the requested family."""
    return pgen_detailed(req).value


# -- scaling checks -------------------------------------------------------------------


def edge_t(l: int, x: float) -> float:
    """``t`` with ``2t = l - x (l/2)^{1/3}``."""
    return 0.5 * (l - x * (l / 2) ** (1 / 3))


def signed_edge_t(l: int, x: float) -> float:
    """``t`` with ``4t = l - x (2l)^{1/3}``."""
    return 0.25 * (l - x * (2 * l) ** (1 / 3))


def critical_alpha(l: int, w: float) -> float:
    return 1.0 - 2.0 ** (4 / 3) * w * l ** (-1 / 3)


@dataclass(frozen=True)
class LimitReport:
    family: str
    x: float
    parameter: float
    rows: list  # (l, t, value, target, distance)


def poissonized_limit_check(family: str, x: float, w_or_alpha: float, l_list, grid=None, mode: str = "alpha") -> LimitReport:
    """Evaluate ``pgen`` along the edge scaling and compare with its limit law.

    ``mode='alpha'``: fixed ``0 <= alpha < 1`` (square -> F4, diamond -> F1,
    signed -> F2).  ``mode='w'``: ``alpha = 1 - 2^{4/3} w l^{-1/3}`` (square ->
    F_square(x; w)).  ``mode='det'``: ``e^{-t^2} D_l`` -> ``F(x)^2``.
    """
    from . import lax
    from .painleve2 import default_grid, eval_tw

    grid = grid or default_grid()
    rows = []
    for l in l_list:
        if family == "signed" and mode == "alpha":
            t = signed_edge_t(l, x)
        else:
            t = edge_t(l, x)
        if mode == "det":
            seq = _sequence(t, required_k_max(l, t), None)
            value = float(det_products(seq, l).D)
            target = float(eval_tw(grid, x, 2))
        elif mode == "w":
            alpha = critical_alpha(l, w_or_alpha)
            value = pgen(GenFnRequest(family, l, t, alpha=alpha))
            target = lax.f_square(grid, x, w_or_alpha) if family == "square" else lax.f_diamond(grid, x, w_or_alpha)
        else:
            a = w_or_alpha
            req = GenFnRequest(family, l, t, alpha=a if family != "diamond" else 0.0, beta=a if family == "diamond" else 0.0)
            value = pgen(req)
            ens = {"square": 4, "diamond": 1, "signed": 2}[family]
            target = float(eval_tw(grid, x, ens))
        rows.append((l, t, value, target, abs(value - target)))
    return LimitReport(family, x, w_or_alpha, rows)


def gaussian_poisson_check(alpha: float, t: float, x: float) -> float:
    """``P(L_square(t; alpha) <= l)`` at ``l = (alpha + 1/alpha) t + x sqrt((alpha - 1/alpha) t)``.

    Returns the distance to the standard normal CDF at ``x``; the value itself
    is available through :func:`gaussian_poisson_value`.
    """
    v, phi = gaussian_poisson_value(alpha, t, x)
    return abs(v - phi)


def gaussian_poisson_value(alpha: float, t: float, x: float) -> tuple[float, float]:
    if alpha < 1.2 or t < 50:
        raise InvalidConfig("needs alpha >= 1.2 and t >= 50")
    l = math.floor((alpha + 1 / alpha) * t + x * math.sqrt((alpha - 1 / alpha) * t))
    v = pgen(GenFnRequest("square", max(l, 0), t, alpha=alpha))
    return v, 0.5 * math.erfc(-x / math.sqrt(2))

"""De-Poissonization brackets.

For a sequence ``q_n`` that is nonincreasing in ``n`` with Poisson mixture
``phi(lam) = e^{-lam} sum lam^k/k! q_k``, the value ``q_n`` is bracketed by
``phi`` evaluated at the shifted parameters ``mu_n > n > nu_n``, up to an
additive ``C n^{-d}`` whose constant is not known explicitly.  That slack is
zero unless the caller supplies ``C``; the omission is recorded on the result.

``tail=True`` replaces ``C n^{-d}`` by the quantity it bounds: with
``p_k`` the Poisson(mu) weights, ``phi(mu) <= P(Pois(mu) < n) + q_n`` and
``q_n <= phi(nu) + P(Pois(nu) > n)`` hold for any nonincreasing ``q`` with
values in ``[0, 1]``, so these tails give a bracket with no unknown constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import mpmath
from scipy.stats import poisson

from .circle_ops import GenFnRequest, pgen
from .errors import InvalidConfig

SLACK_NOTE = "additive C*n^-d terms omitted (C unspecified)"


@dataclass(frozen=True)
class Bracket:
    lower: float
    upper: float
    slack_note: str

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise InvalidConfig(f"empty bracket [{self.lower}, {self.upper}]")

    def contains(self, q: float) -> bool:
        return self.lower <= q <= self.upper

    @property
    def width(self) -> float:
        return self.upper - self.lower


def shift(n: int, d: float) -> float:
    """``(2 sqrt(d+1) + 1) sqrt(n log n)``."""
    return (2 * math.sqrt(d + 1) + 1) * math.sqrt(n * math.log(n))


def mu_nu(n: int, d: float) -> tuple[float, float]:
    if n < 2:
        raise InvalidConfig("n must be at least 2")
    if d <= 0:
        raise InvalidConfig("d must be positive")
    c = shift(n, d)
    return n + c, n - c


def _params(n: int, d: float) -> tuple[float, float]:
    """``(mu, nu)`` with ``nu`` clipped at 0.  For ``n < 2`` the shift of ``n = 2``
    is used, which only widens the bracket."""
    c = shift(max(n, 2), d)
    return n + c, max(n - c, 0.0)


def _slack(C: float | None, *ns: int, d: float) -> tuple[float, float, str]:
    if C is None:
        return 0.0, 0.0, SLACK_NOTE
    s = C * sum(max(n, 1) ** (-d) for n in ns)
    return s, s, f"slack C*sum n^-d with C={C}"


def _tail_slack(pairs) -> tuple[float, float, str]:
    """``pairs`` of ``(n, mu, nu)``; slack ``sum P(Pois(mu) < n)`` below and
    ``sum P(Pois(nu) > n)`` above."""
    lo = sum(float(poisson.cdf(n - 1, mu)) if n > 0 else 0.0 for n, mu, _ in pairs)
    hi = sum(float(poisson.sf(n, nu)) for n, _, nu in pairs)
    return lo, hi, "slack = explicit Poisson tails"


def _clip(x: float) -> float:
    return min(1.0, max(0.0, x))


def bracket_one(
    phi: Callable[[float], float], n: int, d: float, C: float | None = None, tail: bool = False
) -> Bracket:
    """``[phi(mu_n) - slack, phi(nu_n) + slack]``; ``q`` must be nonincreasing."""
    mu, nu = _params(n, d)
    lo, hi, note = _tail_slack([(n, mu, nu)]) if tail else _slack(C, n, d=d)
    return Bracket(_clip(phi(mu) - lo), _clip(phi(nu) + hi), note)


def bracket_two(
    phi2: Callable[[float, float], float], n1: int, n2: int, d: float, C: float | None = None, tail: bool = False
) -> Bracket:
    """Two-index version; ``q`` must be nonincreasing in each index."""
    mu1, nu1 = _params(n1, d)
    mu2, nu2 = _params(n2, d)
    lo, hi, note = _tail_slack([(n1, mu1, nu1), (n2, mu2, nu2)]) if tail else _slack(C, n1, n2, d=d)
    return Bracket(_clip(phi2(mu1, mu2) - lo), _clip(phi2(nu1, nu2) + hi), note)


def square_surface(l: int) -> Callable[[float, float], float]:
    """``(lam1, lam2) -> Q_l(lam1, lam2)`` for the first row: ``lam1`` is the
    fixed-point parameter ``alpha t`` and ``lam2`` the 2-cycle parameter ``t^2/2``."""

    def phi2(lam1: float, lam2: float) -> float:
        if lam2 == 0.0:
            # only fixed points: the identity on m letters has LIS m
            return float(mpmath.exp(-lam1) * mpmath.fsum(mpmath.mpf(lam1) ** k / mpmath.factorial(k) for k in range(l + 1)))
        t = math.sqrt(2.0 * lam2)
        return pgen(GenFnRequest("square", l, t, alpha=lam1 / t))

    return phi2

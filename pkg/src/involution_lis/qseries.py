"""Truncated Poisson series of exact finite-size probabilities.

This is the oracle side of the generating-function cross-check: the Poisson
mixtures ``Q_l`` are summed term by term from exact rational laws (hook-length
enumeration for unsigned involutions, brute-force enumeration for signed ones)
and the omitted Poisson mass is returned as a certified bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import mpmath

from .errors import TooLarge
from .montecarlo import first_two_rows, signed_class_size, signed_enumerate
from .tableaux import SIZE_CAP, exact_cdf

SIGNED_CAP = 8  # positive letters N = 2n + m+ + m- for brute-force enumeration
WEIGHT_CUTOFF = 1e-24  # Poisson weights below this are left to the tail bound


@dataclass(frozen=True)
class SeriesValue:
    value: float
    tail_bound: float
    terms: int


def _poisson(lam, k):
    return mpmath.power(lam, k) / mpmath.factorial(k)


def q_unsigned(l: int, lam1: float, lam2: float, which: str = "row", k: int = 1, dps: int = 40) -> SeriesValue:
    """``e^{-lam1-lam2} sum lam1^m lam2^n/(m! n!) P(stat_{n,m} <= l)`` over ``2n+m <= SIZE_CAP``."""
    with mpmath.workdps(dps):
        l1, l2 = mpmath.mpf(lam1), mpmath.mpf(lam2)
        e = mpmath.exp(-l1 - l2)
        total = mass = mpmath.mpf(0)
        terms = 0
        for n in range(SIZE_CAP // 2 + 1):
            for m in range(SIZE_CAP - 2 * n + 1):
                w = _poisson(l1, m) * _poisson(l2, n)
                if e * w < WEIGHT_CUTOFF:
                    continue
                # lambda_k <= size / k always holds
                p = 1 if 2 * n + m <= l * k else exact_cdf(n, m, which, k, l)
                total += w * mpmath.mpf(p.numerator) / p.denominator
                mass += w
                terms += 1
        return SeriesValue(float(e * total), float(1 - e * mass), terms)


@lru_cache(maxsize=None)
def signed_row_counts(n: int, m_plus: int, m_minus: int, k: int = 1) -> tuple[int, ...]:
    """``counts[l]`` = number of signed involutions in the class with ``lambda_k = l``."""
    N = 2 * n + m_plus + m_minus
    if N > SIGNED_CAP:
        raise TooLarge(f"N = {N} exceeds the signed enumeration cap {SIGNED_CAP}")
    counts = [0] * (2 * N + 1)
    for perm in signed_enumerate(n, m_plus, m_minus):
        counts[first_two_rows(perm)[k - 1]] += 1
    assert sum(counts) == signed_class_size(n, m_plus, m_minus)
    return tuple(counts)


def q_signed(l: int, lam1: float, lam2: float, lam3: float, k: int = 1, dps: int = 40) -> SeriesValue:
    """Signed mixture, ``lam1`` for ``m+``, ``lam2`` for ``m-``, ``lam3`` for pairs,
    over classes with ``2n + m+ + m- <= SIGNED_CAP``."""
    with mpmath.workdps(dps):
        a, b, c = (mpmath.mpf(x) for x in (lam1, lam2, lam3))
        total = mass = mpmath.mpf(0)
        terms = 0
        for n in range(SIGNED_CAP // 2 + 1):
            for mp in range(SIGNED_CAP - 2 * n + 1):
                for mm in range(SIGNED_CAP - 2 * n - mp + 1):
                    w = _poisson(a, mp) * _poisson(b, mm) * _poisson(c, n)
                    counts = signed_row_counts(n, mp, mm, k)
                    total += w * mpmath.mpf(sum(counts[: l + 1])) / sum(counts)
                    mass += w
                    terms += 1
        e = mpmath.exp(-a - b - c)
        return SeriesValue(float(e * total), float(1 - e * mass), terms)


def q_square(l: int, t: float, alpha: float, k: int = 1) -> SeriesValue:
    return q_unsigned(l, alpha * t, t * t / 2, "row", k)


def q_diamond(l: int, t: float, beta: float, k: int = 1) -> SeriesValue:
    return q_unsigned(l, beta * t, t * t / 2, "column", k)


def q_signed_family(l: int, t: float, alpha: float, beta: float, k: int = 1) -> SeriesValue:
    return q_signed(l, alpha * t, beta * t, t * t, k)


def poisson_tail(lam: float, k: int) -> float:
    """``P(Poisson(lam) > k)``, for reporting."""
    return float(1 - sum(_poisson(mpmath.mpf(lam), j) for j in range(k + 1)) * mpmath.exp(-lam))

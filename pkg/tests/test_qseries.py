from __future__ import annotations

import math

import pytest

from involution_lis.circle_ops import GenFnRequest, pgen
from involution_lis.errors import TooLarge
from involution_lis.montecarlo import signed_class_size
from involution_lis.qseries import (
    poisson_tail,
    q_diamond,
    q_signed_family,
    q_square,
    q_unsigned,
    signed_row_counts,
)


def _agree(series, value, tol=1e-10):
    return abs(series.value - value) <= series.tail_bound + tol


@pytest.mark.parametrize("l", [0, 1, 2, 3, 4, 5])
@pytest.mark.parametrize("alpha", [0.0, 0.7, 1.3])
def test_square(l, alpha):
    t = 0.6
    assert _agree(q_square(l, t, alpha), pgen(GenFnRequest("square", l, t, alpha=alpha)))


@pytest.mark.parametrize("l", [1, 3, 5])
def test_diamond_odd_and_beta_free(l):
    t = 0.6
    vals = [q_diamond(l, t, b) for b in (0.0, 0.5, 1.2)]
    ref = pgen(GenFnRequest("diamond", l, t, beta=0.5))
    for v in vals:
        assert _agree(v, ref)


@pytest.mark.parametrize("l", [0, 2, 4])
def test_diamond_even_special_betas(l):
    t = 0.6
    for b in (0.0, 1.0):
        assert _agree(q_diamond(l, t, b), pgen(GenFnRequest("diamond", l, t, beta=b)))


@pytest.mark.parametrize("l", [1, 3])
def test_second_rows(l):
    t = 0.6
    sq = q_unsigned(l, 0.9 * t, t * t / 2, "row", k=2)
    assert _agree(sq, pgen(GenFnRequest("square_row2", l, t, alpha=0.9)))
    di = q_unsigned(l, 0.4 * t, t * t / 2, "column", k=2)
    assert _agree(di, pgen(GenFnRequest("diamond_row2", l, t, beta=0.4)))


@pytest.mark.parametrize("l,a,b", [(1, 0.7, 0.4), (3, 0.7, 0.4), (3, 0.0, 1.1), (0, 0.0, 0.0), (2, 0.0, 0.0)])
def test_signed(l, a, b):
    t = 0.12
    v = q_signed_family(l, t, a, b)
    assert v.tail_bound < 1e-8
    assert _agree(v, pgen(GenFnRequest("signed", l, t, alpha=a, beta=b)))


def test_signed_second_row():
    t = 0.12
    v = q_signed_family(3, t, 0.7, 0.4, k=2)
    assert _agree(v, pgen(GenFnRequest("signed_row2", 3, t, alpha=0.7, beta=0.4)))


def test_signed_counts():
    assert sum(signed_row_counts(1, 1, 1)) == signed_class_size(1, 1, 1) == math.factorial(4) // 1
    with pytest.raises(TooLarge):
        signed_row_counts(4, 1, 0)


def test_poisson_tail():
    assert poisson_tail(2.0, 3) == pytest.approx(1 - math.exp(-2) * (1 + 2 + 2 + 4 / 3), rel=1e-12)

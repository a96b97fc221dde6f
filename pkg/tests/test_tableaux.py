from __future__ import annotations

import math
from fractions import Fraction
from itertools import permutations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from involution_lis.errors import MalformedPermutation, TooLarge
from involution_lis.tableaux import (
    Partition,
    brute_force_cdf,
    conjugate,
    count_involutions,
    enumerate_Y,
    exact_cdf,
    exact_cdf_table,
    involution_class_size,
    involutions_with_fixed_points,
    partitions,
    plancherel_beta1_cdf,
    rsk_shape,
    syt_count,
)

partition_st = st.integers(min_value=0, max_value=30).flatmap(lambda n: st.sampled_from(list(partitions(n))))


def _syt_brute(p: Partition) -> int:
    # fill 1..n cell by cell; a cell is addable when its row and column allow it
    def rec(filled: tuple[int, ...]) -> int:
        if sum(filled) == p.size:
            return 1
        total = 0
        for i, r in enumerate(p.parts):
            c = filled[i]
            if c < r and (i == 0 or filled[i - 1] > c):
                total += rec(filled[:i] + (c + 1,) + filled[i + 1 :])
        return total

    return rec((0,) * len(p))


def test_partition_validation():
    with pytest.raises(ValueError):
        Partition((1, 2))
    with pytest.raises(ValueError):
        Partition((2, 0))


def test_conjugate_examples():
    assert conjugate(Partition((4, 3, 1))).parts == (3, 2, 2, 1)
    assert conjugate(Partition((5,))).parts == (1,) * 5


@settings(max_examples=60)
@given(partition_st)
def test_conjugate_involutive(p):
    assert conjugate(conjugate(p)) == p
    assert conjugate(p).size == p.size


def test_syt_examples():
    assert syt_count(Partition((4, 3, 1))) == 70
    assert syt_count(Partition((6,))) == 1
    assert syt_count(Partition((1, 1, 1, 1))) == 1


@pytest.mark.parametrize("n", range(1, 9))
def test_syt_against_fillings(n):
    for p in partitions(n):
        assert syt_count(p) == _syt_brute(p)


@pytest.mark.parametrize("n", range(0, 9))
def test_sum_of_squares(n):
    assert sum(syt_count(p) ** 2 for p in partitions(n)) == math.factorial(n)


def test_enumerate_examples():
    assert {p.parts for p in enumerate_Y(1, 1)} == {(2, 1), (1, 1, 1)}
    assert [p.parts for p in enumerate_Y(0, 0)] == [()]
    assert [p.parts for p in enumerate_Y(1, 0)] == [(1, 1)]


@pytest.mark.parametrize("size", range(0, 21))
def test_class_sizes(size):
    for m in range(size % 2, size + 1, 2):
        n = (size - m) // 2
        assert sum(syt_count(p) for p in enumerate_Y(n, m)) == involution_class_size(n, m)


def test_count_involutions():
    assert count_involutions(0) == 1
    assert count_involutions(3) == 4
    total = sum(involution_class_size((10 - m) // 2, m) for m in range(0, 11, 2))
    assert count_involutions(10) == total


def test_exact_examples():
    assert exact_cdf(1, 1, "row", 1, 1) == Fraction(1, 3)
    assert exact_cdf(1, 1, "row", 1, 3) == 1
    assert brute_force_cdf(1, 1, "row", 1, 1) == Fraction(1, 3)
    assert len(list(involutions_with_fixed_points(1, 1))) == 3
    for l in range(6):
        assert brute_force_cdf(0, 5, "row", 1, l) == (1 if l >= 5 else 0)


def test_plancherel_examples():
    assert plancherel_beta1_cdf(3, 1, 1) == Fraction(1, 4)
    assert plancherel_beta1_cdf(1, 1, 1) == 1
    assert plancherel_beta1_cdf(3, 2, 0) == Fraction(1, 4)


@pytest.mark.parametrize("size", range(0, 9))
def test_plancherel_is_involution_law(size):
    # the beta = 1 Plancherel law is the RSK image of a uniform involution
    invs = [
        p for m in range(size % 2, size + 1, 2) for p in involutions_with_fixed_points((size - m) // 2, m)
    ]
    for l in range(size + 1):
        hits = sum(1 for p in invs if rsk_shape(p).row(1) <= l)
        assert plancherel_beta1_cdf(size, 1, l) == Fraction(hits, len(invs))


def test_rsk_examples():
    assert rsk_shape([1, 2, 3, 4, 5]).parts == (5,)
    assert rsk_shape([5, 4, 3, 2, 1]).parts == (1,) * 5
    assert rsk_shape([1, 3, 2]).parts == (2, 1)
    with pytest.raises(MalformedPermutation):
        rsk_shape([1, 1, 2])


@pytest.mark.parametrize("N", range(1, 7))
def test_rsk_is_a_bijection_onto_tableau_pairs(N):
    counts: dict = {}
    for perm in permutations(range(1, N + 1)):
        s = rsk_shape(perm)
        counts[s] = counts.get(s, 0) + 1
    assert counts == {p: syt_count(p) ** 2 for p in partitions(N)}


def test_table_invariants():
    t = exact_cdf_table(3, 2, "column", 2)
    vals = [t(l) for l in range(-1, 10)]
    assert vals[0] == 0 and vals[-1] == 1
    assert all(a <= b for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("which", ["row", "column"])
def test_monotone_in_n_and_m(which):
    for l in range(1, 6):
        for n in range(0, 6):
            for m in range(0, 6):
                p = exact_cdf(n, m, which, 1, l)
                assert exact_cdf(n + 1, m, which, 1, l) <= p
                assert exact_cdf(n, m + 1, which, 1, l) <= p


def test_caps_and_arguments():
    with pytest.raises(TooLarge):
        exact_cdf(20, 1, "row", 1, 3)
    with pytest.raises(TooLarge):
        brute_force_cdf(5, 1, "row", 1, 3)
    with pytest.raises(ValueError):
        exact_cdf(1, 1, "diagonal", 1, 1)
    with pytest.raises(ValueError):
        exact_cdf(1, 1, "row", 3, 1)
    with pytest.raises(ValueError):
        list(enumerate_Y(-1, 0))

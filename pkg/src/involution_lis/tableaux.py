"""Exact finite-size laws of the first rows and columns of RSK shapes of involutions.

Under Robinson-Schensted an involution maps to a single standard tableau, and
the number of its fixed points equals the number of odd columns of the shape,
i.e. the alternating row sum ``lambda_1 - lambda_2 + lambda_3 - ...``.  So the
shape of a uniform involution of ``2n + m`` letters with ``m`` fixed points has
law ``d_lambda / sum d_mu`` over ``Y_{n,m}``, the partitions of ``2n + m`` with
alternating sum ``m``.  Everything here is exact integer/rational arithmetic.
"""

from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

from .errors import MalformedPermutation, TooLarge

SIZE_CAP = 40
BRUTE_FORCE_CAP = 10


@dataclass(frozen=True)
class Partition:
    parts: tuple[int, ...]

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if any(p < 1 for p in parts) or any(a < b for a, b in zip(parts, parts[1:])):
            raise ValueError(f"not a partition: {parts}")
        object.__setattr__(self, "parts", parts)

    @property
    def size(self) -> int:
        return sum(self.parts)

    def row(self, k: int) -> int:
        """``lambda_k`` (1-based), zero past the last row."""
        return self.parts[k - 1] if k <= len(self.parts) else 0

    def alternating_sum(self) -> int:
        return sum(p if i % 2 == 0 else -p for i, p in enumerate(self.parts))

    def __len__(self) -> int:
        return len(self.parts)


def conjugate(p: Partition) -> Partition:
    if not p.parts:
        return p
    return Partition(tuple(sum(1 for r in p.parts if r > j) for j in range(p.parts[0])))


def syt_count(p: Partition) -> int:
    """Number of standard Young tableaux of shape ``p`` (hook-length formula)."""
    cols = conjugate(p).parts
    hooks = 1
    for i, r in enumerate(p.parts):
        for j in range(r):
            hooks *= (r - j - 1) + (cols[j] - i - 1) + 1
    return math.factorial(p.size) // hooks


def partitions(n: int, max_part: int | None = None) -> Iterator[Partition]:
    """All partitions of ``n``, largest first part first."""
    for parts in _partitions(n, n if max_part is None else min(max_part, n)):
        yield Partition(parts)


def _partitions(n: int, max_part: int) -> Iterator[tuple[int, ...]]:
    if n == 0:
        yield ()
        return
    for first in range(max_part, 0, -1):
        for rest in _partitions(n - first, min(first, n - first)):
            yield (first,) + rest


def enumerate_Y(n: int, m: int) -> Iterator[Partition]:
    """Partitions of ``2n + m`` with alternating row sum ``m``."""
    if n < 0 or m < 0:
        raise ValueError("n and m must be nonnegative")
    for p in partitions(2 * n + m):
        if p.alternating_sum() == m:
            yield p


def involution_class_size(n: int, m: int) -> int:
    """``|S_{n,m}| = (2n+m)! / (n! m! 2^n)``."""
    return math.factorial(2 * n + m) // (math.factorial(n) * math.factorial(m) * 2**n)


def count_involutions(N: int) -> int:
    """Number of involutions of ``N`` letters, ``I(N) = I(N-1) + (N-1) I(N-2)``."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    a, b = 1, 1
    for k in range(2, N + 1):
        a, b = b, b + (k - 1) * a
    return b if N >= 1 else a


def _statistic(p: Partition, which: str, k: int) -> int:
    if which == "row":
        return p.row(k)
    if which == "column":
        return conjugate(p).row(k)
    raise ValueError(f"which must be 'row' or 'column', got {which!r}")


def _check_args(which: str, k: int) -> None:
    if which not in ("row", "column"):
        raise ValueError(f"which must be 'row' or 'column', got {which!r}")
    if k not in (1, 2):
        raise ValueError("k must be 1 or 2")


@dataclass(frozen=True)
class ExactCdf:
    n: int
    m: int
    which: str
    k: int
    values: dict  # l -> Fraction, for l = 0..size

    def __call__(self, l: int) -> Fraction:
        if l < 0:
            return Fraction(0)
        return self.values[min(l, max(self.values))]


@lru_cache(maxsize=None)
def _weights(n: int, m: int, which: str, k: int) -> tuple[tuple[int, int], ...]:
    tally: dict[int, int] = {}
    for p in enumerate_Y(n, m):
        s = _statistic(p, which, k)
        tally[s] = tally.get(s, 0) + syt_count(p)
    return tuple(sorted(tally.items()))


def exact_cdf_table(n: int, m: int, which: str = "row", k: int = 1) -> ExactCdf:
    _check_args(which, k)
    if 2 * n + m > SIZE_CAP:
        raise TooLarge(f"2n+m = {2 * n + m} exceeds the enumeration cap {SIZE_CAP}")
    weights = _weights(n, m, which, k)
    total = sum(w for _, w in weights)
    size = 2 * n + m
    values = {}
    acc = 0
    it = iter(weights)
    nxt = next(it, None)
    for l in range(size + 1):
        while nxt is not None and nxt[0] <= l:
            acc += nxt[1]
            nxt = next(it, None)
        values[l] = Fraction(acc, total)
    return ExactCdf(n, m, which, k, values)


def exact_cdf(n: int, m: int, which: str, k: int, l: int) -> Fraction:
    """``P(lambda_k <= l)`` (row) or ``P(lambda^t_k <= l)`` (column) on ``S_{n,m}``."""
    return exact_cdf_table(n, m, which, k)(l)


def plancherel_beta1_cdf(n: int, k: int, l: int) -> Fraction:
    """``P(lambda_k <= l)`` under ``d_lambda / sum d_mu`` on partitions of ``n``."""
    if k not in (1, 2):
        raise ValueError("k must be 1 or 2")
    if n > SIZE_CAP:
        raise TooLarge(f"n = {n} exceeds the enumeration cap {SIZE_CAP}")
    num = den = 0
    for p in partitions(n):
        d = syt_count(p)
        den += d
        if p.row(k) <= l:
            num += d
    return Fraction(num, den)


def _check_permutation(perm: Sequence[int]) -> list[int]:
    vals = [int(v) for v in perm]
    if sorted(vals) != list(range(1, len(vals) + 1)):
        raise MalformedPermutation("expected a bijection of 1..N given as its list of images")
    return vals


def rsk_shape(perm: Sequence[int]) -> Partition:
    """Shape of the Robinson-Schensted insertion tableau of ``perm``."""
    rows: list[list[int]] = []
    for v in _check_permutation(perm):
        for row in rows:
            lo = bisect.bisect_left(row, v)
            if lo == len(row):
                row.append(v)
                break
            row[lo], v = v, row[lo]
        else:
            rows.append([v])
    return Partition(tuple(len(r) for r in rows))


def involutions_with_fixed_points(n: int, m: int) -> Iterator[list[int]]:
    """Every involution of ``2n + m`` letters with exactly ``m`` fixed points."""
    size = 2 * n + m
    for fixed in itertools.combinations(range(1, size + 1), m):
        rest = [x for x in range(1, size + 1) if x not in fixed]
        for matching in _matchings(rest):
            perm = [0] * size
            for x in fixed:
                perm[x - 1] = x
            for a, b in matching:
                perm[a - 1], perm[b - 1] = b, a
            yield perm


def _matchings(items: list[int]) -> Iterator[list[tuple[int, int]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for i, partner in enumerate(rest):
        for sub in _matchings(rest[:i] + rest[i + 1 :]):
            yield [(first, partner)] + sub


def brute_force_cdf(n: int, m: int, which: str, k: int, l: int) -> Fraction:
    """Same law as :func:`exact_cdf`, by RSK on every involution in ``S_{n,m}``."""
    _check_args(which, k)
    stats = _brute_force_statistics(n, m, which, k)
    return Fraction(sum(1 for s in stats if s <= l), len(stats))


@lru_cache(maxsize=None)
def _brute_force_statistics(n: int, m: int, which: str, k: int) -> tuple[int, ...]:
    if 2 * n + m > BRUTE_FORCE_CAP:
        raise TooLarge(f"2n+m = {2 * n + m} exceeds the brute-force cap {BRUTE_FORCE_CAP}")
    return tuple(_statistic(rsk_shape(perm), which, k) for perm in involutions_with_fixed_points(n, m))

"""Samplers for random (signed) involutions, LIS/LDS statistics and scaled limits.

Permutations are lists of images ``[pi(1), ..., pi(N)]`` of ``1..N``.  A signed
involution on ``{-N..-1, 1..N}`` is returned in position encoding: letter
``x < 0`` sits at position ``x + N + 1`` and ``x > 0`` at ``x + N``, so the
natural order of letters is the order of positions and LIS/RSK apply directly.

Every random stream is a Philox counter-based generator keyed by
``SeedSequence(seed, spawn_key=(shard,))``; samples are drawn in fixed-size
shards so results do not depend on how shards are scheduled.
"""

from __future__ import annotations

import bisect
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import InvalidConfig, UnsupportedScaling

SHARD_SIZE = 500
MIN_SAMPLES = 100

KINDS = (
    "involution_fixed_m",
    "signed_involution",
    "uniform_involution",
    "uniform_signed_involution",
    "uniform_permutation",
    "point_process_triangle",
)


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(stream,))))


# ---------------------------------------------------------------------------
# samplers


def sample_involution(n: int, m: int, rng: np.random.Generator) -> list[int]:
    """Uniform element of ``S_{n,m}``: random fixed set, then a uniform matching."""
    if n < 0 or m < 0:
        raise InvalidConfig("n and m must be nonnegative")
    size = 2 * n + m
    order = rng.permutation(size) + 1
    perm = np.arange(1, size + 1)
    a, b = order[m::2], order[m + 1 :: 2]
    perm[a - 1] = b
    perm[b - 1] = a
    return perm.tolist()


def _signed_pairs(N: int, perm: np.ndarray, x: int, y: int) -> None:
    """Record ``pi(x) = y`` and its consequences in position encoding."""
    def pos(v: int) -> int:
        return v + N + 1 if v < 0 else v + N

    def put(a: int, b: int) -> None:
        perm[pos(a) - 1] = pos(b)

    put(x, y)
    put(y, x)
    put(-x, -y)
    put(-y, -x)


def sample_signed_involution(n: int, m_plus: int, m_minus: int, rng: np.random.Generator) -> list[int]:
    """Uniform element of ``S^sgn_{n,m+,m-}`` on ``2N`` letters, ``N = 2n + m+ + m-``."""
    if min(n, m_plus, m_minus) < 0:
        raise InvalidConfig("sizes must be nonnegative")
    N = 2 * n + m_plus + m_minus
    order = (rng.permutation(N) + 1).tolist()
    signs = rng.integers(0, 2, size=n).tolist()
    perm = np.zeros(2 * N, dtype=np.int64)
    for x in order[:m_plus]:
        _signed_pairs(N, perm, x, x)
    for x in order[m_plus : m_plus + m_minus]:
        _signed_pairs(N, perm, x, -x)
    rest = order[m_plus + m_minus :]
    for k in range(n):
        a, b = rest[2 * k], rest[2 * k + 1]
        _signed_pairs(N, perm, a, b if signs[k] else -b)
    return perm.tolist()


def _fixed_probabilities(N: int, signed: bool) -> list[float]:
    """``p[k]`` = probability that a given letter among ``k`` unassigned ones is
    fixed (or, when signed, fixed or negated)."""
    p = [0.0] * (N + 1)
    r = 0.0
    for k in range(1, N + 1):
        if signed:
            # T(k) = 2T(k-1) + 2(k-1)T(k-2); r = T(k-1)/T(k)
            r = 1.0 / (2.0 + 2.0 * (k - 1) * r) if k > 1 else 0.5
            p[k] = 2.0 * r
        else:
            # I(k) = I(k-1) + (k-1)I(k-2); r = I(k-1)/I(k)
            r = 1.0 / (1.0 + (k - 1) * r) if k > 1 else 1.0
            p[k] = r
    return p


def _sequential_involution(N: int, rng: np.random.Generator, signed: bool):
    p = _fixed_probabilities(N, signed)
    free = list(range(1, N + 1))
    u = rng.random(N)
    pick = rng.random(N)
    sign = rng.integers(0, 2, size=N)
    steps = []
    i = 0
    while free:
        k = len(free)
        x = free.pop()
        if u[i] < p[k]:
            steps.append((x, x if not signed or sign[i] else -x))
        else:
            j = min(int(pick[i] * (k - 1)), k - 2)
            y = free[j]
            free[j] = free[-1]
            free.pop()
            steps.append((x, y if not signed or sign[i] else -y))
        i += 1
    return steps


def sample_uniform_involution(N: int, rng: np.random.Generator) -> list[int]:
    """Uniform involution of ``N`` letters (telephone-number recursion)."""
    if N < 0:
        raise InvalidConfig("N must be nonnegative")
    perm = list(range(1, N + 1))
    for x, y in _sequential_involution(N, rng, signed=False):
        perm[x - 1], perm[y - 1] = y, x
    return perm


def sample_uniform_signed_involution(N: int, rng: np.random.Generator) -> list[int]:
    """Uniform signed involution on ``{-N..-1, 1..N}``, position encoded."""
    if N < 0:
        raise InvalidConfig("N must be nonnegative")
    perm = np.zeros(2 * N, dtype=np.int64)
    for x, y in _sequential_involution(N, rng, signed=True):
        _signed_pairs(N, perm, x, y)
    return perm.tolist()


def sample_uniform_permutation(N: int, rng: np.random.Generator) -> list[int]:
    return (rng.permutation(N) + 1).tolist()


def sample_point_process(n: int, m: int, rng: np.random.Generator) -> list[int]:
    """``n`` uniform points above the diagonal of the unit square, their mirror
    images and ``m`` uniform diagonal points; the permutation reads the ranks of
    the ``y`` coordinates in order of ``x``."""
    if n < 0 or m < 0:
        raise InvalidConfig("n and m must be nonnegative")
    while True:
        a = rng.random(n)
        b = rng.random(n)
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        d = rng.random(m)
        xs = np.concatenate([lo, hi, d])
        ys = np.concatenate([hi, lo, d])
        if np.unique(xs).size == xs.size:
            break
    y_rank = np.empty(xs.size, dtype=np.int64)
    y_rank[np.argsort(ys, kind="stable")] = np.arange(1, xs.size + 1)
    return y_rank[np.argsort(xs, kind="stable")].tolist()


def signed_enumerate(n: int, m_plus: int, m_minus: int) -> Iterator[list[int]]:
    """Every element of ``S^sgn_{n,m+,m-}`` in position encoding."""
    N = 2 * n + m_plus + m_minus
    letters = range(1, N + 1)
    for fixed in itertools.combinations(letters, m_plus):
        left = [x for x in letters if x not in fixed]
        for neg in itertools.combinations(left, m_minus):
            rest = [x for x in left if x not in neg]
            for matching in _matchings(rest):
                for signs in itertools.product((1, -1), repeat=n):
                    perm = np.zeros(2 * N, dtype=np.int64)
                    for x in fixed:
                        _signed_pairs(N, perm, x, x)
                    for x in neg:
                        _signed_pairs(N, perm, x, -x)
                    for (a, b), s in zip(matching, signs):
                        _signed_pairs(N, perm, a, s * b)
                    yield perm.tolist()


def _matchings(items: list[int]) -> Iterator[list[tuple[int, int]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for i, partner in enumerate(rest):
        for sub in _matchings(rest[:i] + rest[i + 1 :]):
            yield [(first, partner)] + sub


def signed_class_size(n: int, m_plus: int, m_minus: int) -> int:
    return math.factorial(2 * n + m_plus + m_minus) // (
        math.factorial(n) * math.factorial(m_plus) * math.factorial(m_minus)
    )


# ---------------------------------------------------------------------------
# statistics


def lis(perm: Sequence[int]) -> int:
    """Longest increasing subsequence by patience sorting."""
    piles: list[int] = []
    for v in perm:
        i = bisect.bisect_left(piles, v)
        if i == len(piles):
            piles.append(v)
        else:
            piles[i] = v
    return len(piles)


def lds(perm: Sequence[int]) -> int:
    return lis([-v for v in perm])


def first_two_rows(perm: Sequence[int]) -> tuple[int, int]:
    """``(lambda_1, lambda_2)`` of the RSK shape.  Entries bumped out of the
    second row never influence rows one and two, so they are dropped."""
    row1: list[int] = []
    row2: list[int] = []
    for v in perm:
        i = bisect.bisect_left(row1, v)
        if i == len(row1):
            row1.append(v)
            continue
        row1[i], v = v, row1[i]
        j = bisect.bisect_left(row2, v)
        if j == len(row2):
            row2.append(v)
        else:
            row2[j] = v
    return len(row1), len(row2)


def first_two_columns(perm: Sequence[int]) -> tuple[int, int]:
    """``(lambda^t_1, lambda^t_2)``: reversing a permutation transposes its shape."""
    return first_two_rows(perm[::-1])


# ---------------------------------------------------------------------------
# ensembles and scalings


@dataclass(frozen=True)
class SizeRule:
    """How a fixed-point count is derived from the size parameter.

    ``explicit``: the count is ``value``.  For unsigned ensembles ``alpha``
    gives ``[alpha sqrt(2n)]`` and ``w`` gives ``[sqrt(2n) - 2w (2n)^{1/3}]``;
    for signed ensembles ``sqrt(2n)`` is replaced by ``sqrt(n)``.
    """

    kind: str = "explicit"
    value: float = 0.0

    def resolve(self, base: float) -> int:
        if self.kind == "explicit":
            m = int(self.value)
        elif self.kind == "alpha":
            m = math.floor(self.value * math.sqrt(base))
        elif self.kind == "w":
            m = math.floor(math.sqrt(base) - 2.0 * self.value * base ** (1.0 / 3.0))
        else:
            raise InvalidConfig(f"unknown size rule {self.kind!r}")
        if m < 0:
            raise InvalidConfig(f"rule {self.kind}={self.value} gives negative count {m}")
        return m


@dataclass(frozen=True)
class EnsembleSpec:
    """One random ensemble.

    ``n`` is the number of 2-cycles for ``involution_fixed_m``,
    ``signed_involution`` and ``point_process_triangle``, and the number of
    (positive) letters for the uniform kinds.  ``which`` selects rows (LIS) or
    columns (LDS).  ``gaussian_t`` switches to the fixed-size Gaussian regime:
    ``n = [t^2/2]``, ``m = [alpha t]`` with ``alpha = m_rule.value``.
    """

    kind: str
    n: int = 0
    m_rule: SizeRule = field(default_factory=SizeRule)
    m_plus_rule: SizeRule = field(default_factory=SizeRule)
    m_minus_rule: SizeRule = field(default_factory=SizeRule)
    seed: int = 0
    which: str = "row"
    gaussian_t: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidConfig(f"unknown ensemble kind {self.kind!r}")
        if self.which not in ("row", "column"):
            raise InvalidConfig("which must be 'row' or 'column'")
        if self.gaussian_t is not None:
            if self.kind not in ("involution_fixed_m", "point_process_triangle") or self.m_rule.kind != "alpha":
                raise InvalidConfig("the Gaussian regime needs an unsigned ensemble with an alpha rule")
            if self.m_rule.value <= 1 or self.gaussian_t <= 0:
                raise InvalidConfig("the Gaussian regime needs alpha > 1 and t > 0")
        elif self.n < 0:
            raise InvalidConfig("n must be nonnegative")
        self.sizes()

    def sizes(self) -> dict:
        if self.gaussian_t is not None:
            t = self.gaussian_t
            return {"n": math.floor(t * t / 2), "m": math.floor(self.m_rule.value * t)}
        if self.kind in ("involution_fixed_m", "point_process_triangle"):
            return {"n": self.n, "m": self.m_rule.resolve(2 * self.n)}
        if self.kind == "signed_involution":
            return {
                "n": self.n,
                "m_plus": self.m_plus_rule.resolve(self.n),
                "m_minus": self.m_minus_rule.resolve(self.n),
            }
        return {"N": self.n}

    def letters(self) -> int:
        s = self.sizes()
        if self.kind == "signed_involution":
            return 2 * (2 * s["n"] + s["m_plus"] + s["m_minus"])
        if self.kind == "uniform_signed_involution":
            return 2 * s["N"]
        if "N" in s:
            return s["N"]
        return 2 * s["n"] + s["m"]

    def draw(self, rng: np.random.Generator) -> list[int]:
        s = self.sizes()
        if self.kind == "involution_fixed_m":
            return sample_involution(s["n"], s["m"], rng)
        if self.kind == "point_process_triangle":
            return sample_point_process(s["n"], s["m"], rng)
        if self.kind == "signed_involution":
            return sample_signed_involution(s["n"], s["m_plus"], s["m_minus"], rng)
        if self.kind == "uniform_involution":
            return sample_uniform_involution(s["N"], rng)
        if self.kind == "uniform_signed_involution":
            return sample_uniform_signed_involution(s["N"], rng)
        return sample_uniform_permutation(s["N"], rng)


@dataclass(frozen=True)
class ScaledSample:
    lambda1: int
    lambda2: int
    chi1: float
    chi2: float
    provenance: str


def scaling(spec: EnsembleSpec) -> tuple[float, float, str]:
    """``(center, width, formula)`` with ``chi = (lambda - center) / width``."""
    if spec.gaussian_t is not None:
        a, t = spec.m_rule.value, spec.gaussian_t
        return (a + 1 / a) * t, math.sqrt((1 / a - 1 / a**3) * t), "(L-(a+1/a)t)/sqrt((1/a-1/a^3)t)"
    M = spec.letters()
    if M == 0:
        raise UnsupportedScaling("empty ensemble has no scaling")
    if spec.kind in ("signed_involution", "uniform_signed_involution"):
        return 2 * math.sqrt(M), 2 ** (2 / 3) * M ** (1 / 6), "(L-2sqrt(M))/(2^(2/3)M^(1/6)), M=letters"
    if (
        spec.kind in ("involution_fixed_m", "point_process_triangle")
        and spec.which == "row"
        and spec.m_rule.kind == "alpha"
        and spec.m_rule.value > 1
    ):
        a = spec.m_rule.value
        return (a + 1 / a) * math.sqrt(M), math.sqrt(1 / a - 1 / a**3) * M**0.25, "(L-(a+1/a)sqrt(M))/(sqrt(1/a-1/a^3)M^(1/4))"
    return 2 * math.sqrt(M), M ** (1 / 6), "(L-2sqrt(M))/M^(1/6), M=letters"


def statistic(perm: Sequence[int], which: str) -> tuple[int, int]:
    return first_two_rows(perm) if which == "row" else first_two_columns(perm)


def scale(raw: tuple[int, int], spec: EnsembleSpec) -> ScaledSample:
    center, width, formula = scaling(spec)
    l1, l2 = raw
    return ScaledSample(l1, l2, (l1 - center) / width, (l2 - center) / width, formula)


# ---------------------------------------------------------------------------
# experiments


@dataclass(frozen=True)
class EmpiricalCdf:
    values: np.ndarray
    sample_count: int

    @classmethod
    def from_samples(cls, samples) -> "EmpiricalCdf":
        v = np.sort(np.asarray(samples, dtype=float))
        return cls(v, v.size)

    def __call__(self, x):
        return np.searchsorted(self.values, x, side="right") / self.sample_count

    def merge(self, other: "EmpiricalCdf") -> "EmpiricalCdf":
        return EmpiricalCdf.from_samples(np.concatenate([self.values, other.values]))

    def mean(self) -> float:
        return float(self.values.mean())

    def var(self) -> float:
        return float(self.values.var(ddof=1))


def _shard(spec: EnsembleSpec, shard: int, count: int) -> list[tuple[int, int]]:
    rng = make_rng(spec.seed, shard)
    return [statistic(spec.draw(rng), spec.which) for _ in range(count)]


def raw_samples(spec: EnsembleSpec, samples: int, workers: int = 1) -> list[tuple[int, int]]:
    """``(lambda_1, lambda_2)`` (or the first two columns) for ``samples`` draws."""
    counts = [min(SHARD_SIZE, samples - s) for s in range(0, samples, SHARD_SIZE)]
    if workers <= 1:
        parts = [_shard(spec, i, c) for i, c in enumerate(counts)]
    else:
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_shard, [spec] * len(counts), range(len(counts)), counts))
    return [r for part in parts for r in part]


def run_experiment(spec: EnsembleSpec, stat: str = "chi1", samples: int = 1000, workers: int = 1) -> EmpiricalCdf:
    if stat not in ("chi1", "chi2"):
        raise InvalidConfig("statistic must be chi1 or chi2")
    if samples < MIN_SAMPLES:
        raise InvalidConfig(f"need at least {MIN_SAMPLES} samples")
    scaled = [scale(r, spec) for r in raw_samples(spec, samples, workers)]
    return EmpiricalCdf.from_samples([getattr(s, stat) for s in scaled])


def ks_distance(ecdf: EmpiricalCdf, cdf: Callable) -> float:
    """``max |ecdf(v) - cdf(v)|`` over the distinct sample values ``v``.

    The scaled statistics live on a lattice, so the comparison is made at the
    lattice points themselves; left limits would add the lattice jump, which
    does not vanish at desk-scale sizes."""
    pts = np.unique(ecdf.values)
    ref = np.array([float(cdf(p)) for p in pts])
    return float(np.max(np.abs(ecdf(pts) - ref)))

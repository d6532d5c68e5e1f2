"""Permutations of [n] and the statistics tracked by the samplers.

A permutation is stored as a tuple of images ``(sigma(1), ..., sigma(n))``;
all public semantics are 1-based. Position ``i`` lives at tuple index
``i - 1``, which is the only place 0-based indexing leaks in.
"""
from __future__ import annotations

import enum
import math
from bisect import bisect_left
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class Permutation:
    """Immutable bijection of ``{1, ..., n}`` given by its images."""

    mapping: tuple[int, ...]

    def __post_init__(self) -> None:
        m = tuple(int(v) for v in self.mapping)
        n = len(m)
        if n < 1:
            raise ValueError("a permutation needs n >= 1")
        seen = [False] * (n + 1)
        for v in m:
            if v < 1 or v > n or seen[v]:
                raise ValueError(f"not a permutation of 1..{n}: {m}")
            seen[v] = True
        object.__setattr__(self, "mapping", m)

    @classmethod
    def _trusted(cls, mapping: Sequence[int]) -> "Permutation":
        # Skips validation; kernels call this on outputs they built themselves.
        obj = object.__new__(cls)
        object.__setattr__(obj, "mapping", tuple(mapping))
        return obj

    @property
    def n(self) -> int:
        return len(self.mapping)

    def __call__(self, i: int) -> int:
        if not 1 <= i <= self.n:
            raise IndexError(f"position {i} outside 1..{self.n}")
        return self.mapping[i - 1]

    def __len__(self) -> int:
        return len(self.mapping)

    def __iter__(self):
        return iter(self.mapping)

    def __repr__(self) -> str:
        return f"Permutation{self.mapping}"


def as_perm(x: Permutation | Iterable[int]) -> Permutation:
    return x if isinstance(x, Permutation) else Permutation(tuple(x))


def identity(n: int) -> Permutation:
    if n < 1:
        raise ValueError("identity needs n >= 1")
    return Permutation._trusted(range(1, n + 1))


def reverse(n: int) -> Permutation:
    if n < 1:
        raise ValueError("reverse needs n >= 1")
    return Permutation._trusted(range(n, 0, -1))


def _check_sizes(a: Permutation, b: Permutation) -> None:
    if a.n != b.n:
        raise ValueError(f"size mismatch: {a.n} vs {b.n}")


def compose(a: Permutation, b: Permutation) -> Permutation:
    """``(a o b)(i) = a(b(i))``."""
    _check_sizes(a, b)
    am = a.mapping
    return Permutation._trusted([am[v - 1] for v in b.mapping])


def invert(a: Permutation) -> Permutation:
    inv = [0] * a.n
    for i, v in enumerate(a.mapping, start=1):
        inv[v - 1] = i
    return Permutation._trusted(inv)


def l1_distance(a: Permutation, b: Permutation) -> int:
    """Spearman's footrule."""
    _check_sizes(a, b)
    return sum(abs(x - y) for x, y in zip(a.mapping, b.mapping))


def l2_distance(a: Permutation, b: Permutation) -> int:
    """Spearman's rank correlation distance, sum of squared differences."""
    _check_sizes(a, b)
    return sum((x - y) * (x - y) for x, y in zip(a.mapping, b.mapping))


def positive_displacement_sum(sigma: Permutation) -> int:
    """``sum_i (sigma(i) - i)_+``, half the footrule distance to the identity."""
    return sum(v - i for i, v in enumerate(sigma.mapping, start=1) if v > i)


def cross_term(sigma: Permutation) -> int:
    """``sum_i i * sigma(i)``."""
    return sum(i * v for i, v in enumerate(sigma.mapping, start=1))


def cycle_lengths(sigma: Permutation) -> list[int]:
    m = sigma.mapping
    seen = [False] * (len(m) + 1)
    out = []
    for start in range(1, len(m) + 1):
        if seen[start]:
            continue
        length = 0
        k = start
        while not seen[k]:
            seen[k] = True
            k = m[k - 1]
            length += 1
        out.append(length)
    return out


def cycle_count(sigma: Permutation) -> int:
    return len(cycle_lengths(sigma))


def fixed_points(sigma: Permutation) -> int:
    return sum(1 for i, v in enumerate(sigma.mapping, start=1) if i == v)


def cycle_length_containing(sigma: Permutation, k: int) -> int:
    if not 1 <= k <= sigma.n:
        raise IndexError(f"index {k} outside 1..{sigma.n}")
    m = sigma.mapping
    length = 1
    j = m[k - 1]
    while j != k:
        j = m[j - 1]
        length += 1
    return length


def lis_length(sigma: Permutation | Sequence[int]) -> int:
    """Length of the longest increasing subsequence (patience sorting)."""
    values = sigma.mapping if isinstance(sigma, Permutation) else sigma
    piles: list[int] = []
    for v in values:
        pos = bisect_left(piles, v)
        if pos == len(piles):
            piles.append(v)
        else:
            piles[pos] = v
    return len(piles)


_DENSE_INV_MAX = 256


def inversion_count(values: Sequence[int]) -> int:
    """Number of pairs ``i < j`` with ``values[i] > values[j]``.

    Short inputs use a dense pairwise comparison, longer ones a merge sort.
    """
    if len(values) <= _DENSE_INV_MAX:
        a = np.asarray(values)
        return int(np.count_nonzero(np.triu(a[:, None] > a[None, :], 1)))
    return merge_inversion_count(values)


def merge_inversion_count(values: Sequence[int]) -> int:
    """Bottom-up merge-sort inversion count, O(n log n)."""
    arr = list(values)
    buf = arr[:]
    n = len(arr)
    inv = 0
    width = 1
    while width < n:
        for lo in range(0, n - width, 2 * width):
            mid = lo + width
            hi = min(lo + 2 * width, n)
            i, j, k = lo, mid, lo
            while i < mid and j < hi:
                if arr[i] <= arr[j]:
                    buf[k] = arr[i]
                    i += 1
                else:
                    buf[k] = arr[j]
                    inv += mid - i
                    j += 1
                k += 1
            buf[k:k + mid - i] = arr[i:mid]
            k += mid - i
            buf[k:k + hi - j] = arr[j:hi]
            arr[lo:hi] = buf[lo:hi]
        width *= 2
    return inv


def adjacent_transposition_distance(a: Permutation, b: Permutation) -> int:
    """Fewest left multiplications by ``(i, i+1)`` turning ``a`` into ``b``.

    Equal to the inversion number of ``b o a^{-1}``.
    """
    _check_sizes(a, b)
    return inversion_count(compose(b, invert(a)).mapping)


@dataclass(frozen=True)
class StatisticsRecord:
    """Per-sample statistics; fields not collected are ``None``."""

    t1_fixed_points: int | None = None
    t2_cycle_len_mid: int | None = None
    t3_lis: int | None = None
    h_l1: int | None = None
    h_l2: int | None = None
    cycles: int | None = None
    mean_displacement: float | None = None


class Stat(enum.Enum):
    T1 = "t1"
    T2 = "t2"
    T3 = "t3"
    H = "h_l1"
    H2 = "h_l2"
    C = "cycles"
    MEAN_DISP = "mean_displacement"


ALL_STATS = frozenset(Stat)


def statistics(sigma: Permutation, which: Iterable[Stat] = ALL_STATS) -> StatisticsRecord:
    """Compute the selected statistics of ``sigma``.

    T2 is the length of the cycle through ``ceil(n/2)``.
    """
    which = frozenset(which)
    m = sigma.mapping
    n = len(m)
    vals: dict = {}
    if Stat.T1 in which:
        vals["t1_fixed_points"] = fixed_points(sigma)
    if Stat.T2 in which:
        vals["t2_cycle_len_mid"] = cycle_length_containing(sigma, math.ceil(n / 2))
    if Stat.T3 in which:
        vals["t3_lis"] = lis_length(m)
    if Stat.H in which or Stat.MEAN_DISP in which:
        h = 2 * positive_displacement_sum(sigma)
        if Stat.H in which:
            vals["h_l1"] = h
        if Stat.MEAN_DISP in which:
            vals["mean_displacement"] = h / n
    if Stat.H2 in which:
        vals["h_l2"] = 2 * (n * (n + 1) * (2 * n + 1) // 6) - 2 * cross_term(sigma)
    if Stat.C in which:
        vals["cycles"] = cycle_count(sigma)
    return StatisticsRecord(**vals)

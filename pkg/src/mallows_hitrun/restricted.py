"""Uniform sampling and counting of permutations with one-sided restrictions.

For an upper bound vector ``B`` the target set is ``{tau : tau(i) <= B_i}``;
for a lower bound vector it is ``{tau : tau(i) >= B_i}``. Sampling places the
symbols one at a time (``n`` down to ``1`` for upper bounds, ``1`` up to ``n``
for lower bounds), each uniformly among the free places that admit it.

The free eligible places are kept in a pool with swap-with-last removal, so a
uniform pick is O(1) and a full draw is O(n) after bucketing the bounds.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .perm import Permutation


class Direction(enum.Enum):
    UPPER = "upper"
    LOWER = "lower"


class InfeasibleBounds(ValueError):
    """The restricted set is empty."""


@dataclass(frozen=True)
class BoundVector:
    """Per-position bounds reduced to integers in ``[1, n]``.

    ``raw`` keeps the real-valued bounds when the vector was built from them;
    only ``effective`` matters for the restricted set.
    """

    direction: Direction
    effective: tuple[int, ...]
    raw: tuple[float, ...] | None = None

    @property
    def n(self) -> int:
        return len(self.effective)

    @classmethod
    def upper(cls, raw: Sequence[float]) -> "BoundVector":
        n = len(raw)
        return cls(Direction.UPPER, tuple(min(math.floor(b), n) for b in raw), tuple(float(b) for b in raw))

    @classmethod
    def lower(cls, raw: Sequence[float]) -> "BoundVector":
        return cls(Direction.LOWER, tuple(max(math.ceil(b), 1) for b in raw), tuple(float(b) for b in raw))

    @classmethod
    def upper_int(cls, bounds: Sequence[int]) -> "BoundVector":
        n = len(bounds)
        return cls(Direction.UPPER, tuple(min(int(b), n) for b in bounds))

    @classmethod
    def lower_int(cls, bounds: Sequence[int]) -> "BoundVector":
        return cls(Direction.LOWER, tuple(max(int(b), 1) for b in bounds))

    def admits(self, sigma: Permutation) -> bool:
        if self.direction is Direction.UPPER:
            return all(v <= b for v, b in zip(sigma.mapping, self.effective))
        return all(v >= b for v, b in zip(sigma.mapping, self.effective))


def choice_counts(bounds: BoundVector) -> list[int]:
    """``[N_1, ..., N_n]`` for upper bounds, ``[M_1, ..., M_n]`` for lower.

    ``N_l = #{i : B_i >= l} - (n - l)`` and ``M_l = #{i : B_i <= l} - (l - 1)``
    are the numbers of free places available when symbol ``l`` is placed.
    """
    n = bounds.n
    hist = [0] * (n + 2)
    for b in bounds.effective:
        hist[min(max(b, 0), n + 1)] += 1
    out = [0] * n
    if bounds.direction is Direction.UPPER:
        at_least = hist[n + 1]
        for l in range(n, 0, -1):
            at_least += hist[l]
            out[l - 1] = at_least - (n - l)
    else:
        at_most = hist[0]
        for l in range(1, n + 1):
            at_most += hist[l]
            out[l - 1] = at_most - (l - 1)
    return out


def feasible(bounds: BoundVector) -> bool:
    return all(c >= 1 for c in choice_counts(bounds))


def count_restricted(bounds: BoundVector) -> int:
    """Exact size of the restricted set (0 when infeasible)."""
    counts = choice_counts(bounds)
    if any(c < 1 for c in counts):
        return 0
    return math.prod(counts)


def log_count_restricted(bounds: BoundVector) -> float:
    counts = choice_counts(bounds)
    if any(c < 1 for c in counts):
        return -math.inf
    return float(sum(math.log(c) for c in counts))


def place_upper(eff: Sequence[int], unif: Sequence[float], trace: list | None = None) -> list[int]:
    """Core of :func:`sample_uniform_upper` on plain lists.

    ``eff`` holds integer bounds already clipped to ``[.., n]``; ``unif[l-1]``
    is the uniform in ``[0, 1)`` spent on symbol ``l``. Returns images as a
    list indexed by 0-based position. When ``trace`` is a list, the number of
    choices seen by symbols ``n, n-1, ..., 1`` is appended to it.
    """
    n = len(eff)
    buckets: list[list[int]] = [[] for _ in range(n + 1)]
    for pos, b in enumerate(eff):
        if b >= 1:
            buckets[b].append(pos)
    tau = [0] * n
    pool: list[int] = []
    for l in range(n, 0, -1):
        pool.extend(buckets[l])
        # len(pool) == N_l here
        m = len(pool)
        if trace is not None:
            trace.append(m)
        if m == 0:
            raise InfeasibleBounds(f"no free place admits symbol {l}")
        k = int(unif[l - 1] * m)
        if k >= m:
            k = m - 1
        p = pool[k]
        pool[k] = pool[-1]
        pool.pop()
        tau[p] = l
    return tau


def place_lower(eff: Sequence[int], unif: Sequence[float], trace: list | None = None) -> list[int]:
    """Mirror of :func:`place_upper`: symbols ``1..n``, places with ``B_i <= l``."""
    n = len(eff)
    buckets: list[list[int]] = [[] for _ in range(n + 1)]
    for pos, b in enumerate(eff):
        if b <= n:
            buckets[b].append(pos)
    tau = [0] * n
    pool: list[int] = []
    for l in range(1, n + 1):
        pool.extend(buckets[l])
        m = len(pool)
        if trace is not None:
            trace.append(m)
        if m == 0:
            raise InfeasibleBounds(f"no free place admits symbol {l}")
        k = int(unif[l - 1] * m)
        if k >= m:
            k = m - 1
        p = pool[k]
        pool[k] = pool[-1]
        pool.pop()
        tau[p] = l
    return tau


def sample_uniform_upper(bounds: BoundVector, rng: np.random.Generator) -> Permutation:
    """Exact uniform draw from ``{tau : tau(i) <= B_i for all i}``."""
    if bounds.direction is not Direction.UPPER:
        raise ValueError("expected an upper bound vector")
    if not feasible(bounds):
        raise InfeasibleBounds("restricted set is empty")
    return Permutation._trusted(place_upper(bounds.effective, rng.random(bounds.n).tolist()))


def sample_uniform_lower(bounds: BoundVector, rng: np.random.Generator) -> Permutation:
    """Exact uniform draw from ``{tau : tau(i) >= B_i for all i}``."""
    if bounds.direction is not Direction.LOWER:
        raise ValueError("expected a lower bound vector")
    if not feasible(bounds):
        raise InfeasibleBounds("restricted set is empty")
    return Permutation._trusted(place_lower(bounds.effective, rng.random(bounds.n).tolist()))


def sample_uniform(bounds: BoundVector, rng: np.random.Generator) -> Permutation:
    if bounds.direction is Direction.UPPER:
        return sample_uniform_upper(bounds, rng)
    return sample_uniform_lower(bounds, rng)


def flip_bounds(bounds: BoundVector) -> BoundVector:
    """Bounds of the image of the restricted set under ``tau -> r o tau o r``.

    ``r`` is the reversal ``i -> n + 1 - i``; it swaps upper and lower
    restrictions, with ``B'_i = n + 1 - B_{n+1-i}``.
    """
    n = bounds.n
    eff = tuple(n + 1 - b for b in reversed(bounds.effective))
    if bounds.direction is Direction.UPPER:
        return BoundVector(Direction.LOWER, eff)
    return BoundVector(Direction.UPPER, eff)


def flip_perm(tau: Permutation) -> Permutation:
    n = tau.n
    return Permutation._trusted([n + 1 - v for v in reversed(tau.mapping)])

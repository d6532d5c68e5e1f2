"""Twisted hit-and-run for the footrule + cycle-count model.

The restricted step samples from ``Q(tau) ~ exp(beta2 * C(tau))`` on
``{tau : tau(i) <= B_i}``, placing symbols ``n, n-1, ..., 1``. Before symbol
``l`` is placed it is the tail of an open arc (a partial cycle) whose head is
a free place ``h``. Putting ``l`` at ``h`` closes a cycle, which is weighted by
``exp(beta2)``; any other eligible free place gets weight 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .hitrun import l1_effective_bounds
from .models import TwoParam, two_param_log_weight
from .perm import Permutation
from .restricted import BoundVector, Direction, InfeasibleBounds, choice_counts

__all__ = [
    "OpenArcRegistry",
    "TwistedDraw",
    "place_twisted",
    "sample_twisted_restricted",
    "step_two_param",
    "two_param_log_weight",
]


@dataclass
class OpenArcRegistry:
    """Head/tail bookkeeping for the open arcs of a partial placement.

    ``head_of[t]`` is the head place of the arc whose tail is symbol ``t``;
    ``tail_of[h]`` is the inverse. Index 0 is unused.
    """

    n: int
    head_of: list[int] = field(init=False)
    tail_of: list[int] = field(init=False)
    taken: list[bool] = field(init=False)

    def __post_init__(self):
        self.head_of = list(range(self.n + 1))
        self.tail_of = list(range(self.n + 1))
        self.taken = [False] * (self.n + 1)

    def place(self, symbol: int, place: int) -> bool:
        """Record ``tau(place) = symbol``; return True when this closes a cycle."""
        h = self.head_of[symbol]
        self.taken[place] = True
        self.head_of[symbol] = 0
        if place == h:
            self.tail_of[h] = 0
            return True
        t2 = self.tail_of[place]
        self.tail_of[place] = 0
        self.head_of[t2] = h
        self.tail_of[h] = t2
        return False

    def open_arcs(self) -> dict[int, int]:
        """``{tail symbol: head place}`` for every open arc."""
        return {t: h for t, h in enumerate(self.head_of) if t and h}

    def check(self, unplaced: int) -> None:
        """Assert the registry invariants once symbols ``unplaced+1..n`` are placed."""
        arcs = self.open_arcs()
        assert sorted(arcs) == list(range(1, unplaced + 1)), "tails must be the unplaced symbols"
        heads = list(arcs.values())
        assert len(set(heads)) == len(heads)
        assert all(not self.taken[h] for h in heads), "heads must be free places"
        assert sum(1 for p in range(1, self.n + 1) if not self.taken[p]) == len(heads)
        assert all(self.tail_of[h] == t for t, h in arcs.items())


@dataclass(frozen=True)
class TwistedDraw:
    tau: Permutation
    log_prob: float
    closings: int
    choice_counts: tuple[int, ...]


def place_twisted(eff: Sequence[int], beta2: float, u_branch: Sequence[float], u_pick: Sequence[float],
                  audit: bool = False):
    """Core loop on plain lists; returns images (and the audit data when asked).

    ``u_branch[l-1]`` decides whether symbol ``l`` closes its cycle and
    ``u_pick[l-1]`` picks among the other eligible places otherwise.
    """
    n = len(eff)
    ew = math.exp(beta2)
    buckets: list[list[int]] = [[] for _ in range(n + 1)]
    for pos, b in enumerate(eff, start=1):
        if b >= 1:
            buckets[b].append(pos)
    reg = OpenArcRegistry(n)
    head_of, tail_of, taken = reg.head_of, reg.tail_of, reg.taken
    tau = [0] * n
    pool: list[int] = []
    where = [-1] * (n + 1)
    log_prob = 0.0
    closings = 0
    counts = []
    for l in range(n, 0, -1):
        for p in buckets[l]:
            where[p] = len(pool)
            pool.append(p)
        m = len(pool)
        if m == 0:
            raise InfeasibleBounds(f"no free place admits symbol {l}")
        h = head_of[l]
        wh = where[h]
        if wh < 0:
            raise InfeasibleBounds(f"arc head {h} of symbol {l} is not an eligible free place")
        # move h to the end so the other m-1 places are pool[:m-1]
        last = pool[-1]
        pool[wh] = last
        where[last] = wh
        pool[-1] = h
        where[h] = m - 1
        denom = ew + m - 1
        if m == 1 or u_branch[l - 1] * denom < ew:
            p = h
        else:
            k = int(u_pick[l - 1] * (m - 1))
            if k >= m - 1:
                k = m - 2
            p = pool[k]
            pool[k] = h
            where[h] = k
            pool[-1] = p
            where[p] = m - 1
        pool.pop()
        where[p] = -1
        tau[p - 1] = l
        taken[p] = True
        head_of[l] = 0
        if p == h:
            tail_of[h] = 0
            closings += 1
        else:
            t2 = tail_of[p]
            tail_of[p] = 0
            head_of[t2] = h
            tail_of[h] = t2
        if audit:
            counts.append(m)
            log_prob += (beta2 if p == h else 0.0) - math.log(denom)
            reg.check(l - 1)
    if audit:
        return tau, log_prob, closings, tuple(reversed(counts))
    return tau


def _check_twisted_bounds(bounds: BoundVector) -> None:
    if bounds.direction is not Direction.UPPER:
        raise ValueError("the twisted sampler needs upper bounds")
    if any(b < i for i, b in enumerate(bounds.effective, start=1)):
        raise ValueError("the twisted sampler needs B_i >= i for every i")
    if any(c < 1 for c in choice_counts(bounds)):
        raise InfeasibleBounds("restricted set is empty")


def sample_twisted_restricted(bounds: BoundVector, beta2: float, rng: np.random.Generator, *,
                              audit: bool = False):
    """Exact draw from ``Q(tau) ~ exp(beta2 * C(tau)) 1{tau(i) <= B_i}``.

    With ``audit=True`` returns a :class:`TwistedDraw` carrying the log
    probability of the realized trajectory, the number of cycle closings and
    the per-symbol choice counts ``N_1..N_n``.
    """
    if not beta2 >= 0:
        raise ValueError("beta2 must be non-negative")
    _check_twisted_bounds(bounds)
    n = bounds.n
    u = rng.random(2 * n).tolist()
    out = place_twisted(bounds.effective, beta2, u[:n], u[n:], audit=audit)
    if audit:
        tau, lp, closings, counts = out
        return TwistedDraw(Permutation._trusted(tau), lp, closings, counts)
    return Permutation._trusted(out)


def step_two_param(sigma: Permutation, spec: TwoParam, rng: np.random.Generator | None = None, *,
                   unif=None) -> Permutation:
    """One twisted hit-and-run step: footrule bounds with ``beta1``, then the
    cycle-weighted restricted draw with ``beta2``."""
    m = sigma.mapping
    n = len(m)
    eff = l1_effective_bounds(m, spec.beta1, rng, unif=unif)
    assert all(v <= b for v, b in zip(m, eff))
    u = rng.random(2 * n).tolist()
    return Permutation._trusted(place_twisted(eff, spec.beta2, u[:n], u[n:]))

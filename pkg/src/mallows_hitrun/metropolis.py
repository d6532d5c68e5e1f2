"""Random-transposition Metropolis baselines.

Each step picks ``i, j`` independently and uniformly from ``[n]``; ``i == j``
holds, otherwise ``sigma o (i, j)`` is accepted with the Metropolis ratio.
"""
from __future__ import annotations

import math
from typing import MutableSequence, Sequence

import numpy as np

from .models import TwoParam
from .perm import Permutation


def _accept(exponent: float) -> float:
    return 1.0 if exponent >= 0 else math.exp(exponent)


def l2_exponent(m: Sequence[int], i: int, j: int, beta: float) -> float:
    return -2.0 * beta * (i - j) * (m[i - 1] - m[j - 1])


def l1_exponent(m: Sequence[int], i: int, j: int, beta: float) -> float:
    si, sj = m[i - 1], m[j - 1]
    return -beta * (abs(si - j) + abs(sj - i) - abs(si - i) - abs(sj - j))


def cycle_delta(m: Sequence[int], i: int, j: int) -> int:
    """``C(sigma o (i, j)) - C(sigma)`` for ``i != j``.

    Walks the cycle through ``i``: +1 if ``j`` is on it (split), else -1 (merge).
    """
    k = m[i - 1]
    while k != i:
        if k == j:
            return 1
        k = m[k - 1]
    return -1


def two_param_exponent(m: Sequence[int], i: int, j: int, spec: TwoParam) -> float:
    e = l1_exponent(m, i, j, spec.beta1)
    if spec.beta2:
        e += spec.beta2 * cycle_delta(m, i, j)
    return e


def acceptance_l1(sigma: Permutation, i: int, j: int, beta: float) -> float:
    return 1.0 if i == j else _accept(l1_exponent(sigma.mapping, i, j, beta))


def acceptance_l2(sigma: Permutation, i: int, j: int, beta: float) -> float:
    return 1.0 if i == j else _accept(l2_exponent(sigma.mapping, i, j, beta))


def acceptance_two_param(sigma: Permutation, i: int, j: int, spec: TwoParam) -> float:
    return 1.0 if i == j else _accept(two_param_exponent(sigma.mapping, i, j, spec))


def _propose(rng, n, proposal):
    if proposal is not None:
        i, j, u = proposal
        return int(i), int(j), float(u)
    i, j = rng.integers(1, n + 1, size=2).tolist()
    return i, j, float(rng.random())


def _apply(sigma: Permutation, i: int, j: int, u: float, exponent) -> Permutation:
    if i == j:
        return sigma
    e = exponent()
    if e >= 0 or u < math.exp(e):
        m = list(sigma.mapping)
        m[i - 1], m[j - 1] = m[j - 1], m[i - 1]
        return Permutation._trusted(m)
    return sigma


def metro_step_l2(sigma: Permutation, beta: float, rng: np.random.Generator | None = None, *,
                  proposal: tuple[int, int, float] | None = None) -> Permutation:
    """``proposal=(i, j, u)`` pins the move; ``u`` in [0, 1) is the accept uniform."""
    i, j, u = _propose(rng, sigma.n, proposal)
    return _apply(sigma, i, j, u, lambda: l2_exponent(sigma.mapping, i, j, beta))


def metro_step_l1(sigma: Permutation, beta: float, rng: np.random.Generator | None = None, *,
                  proposal: tuple[int, int, float] | None = None) -> Permutation:
    i, j, u = _propose(rng, sigma.n, proposal)
    return _apply(sigma, i, j, u, lambda: l1_exponent(sigma.mapping, i, j, beta))


def metro_step_two_param(sigma: Permutation, spec: TwoParam, rng: np.random.Generator | None = None, *,
                         proposal: tuple[int, int, float] | None = None) -> Permutation:
    i, j, u = _propose(rng, sigma.n, proposal)
    return _apply(sigma, i, j, u, lambda: two_param_exponent(sigma.mapping, i, j, spec))


class MetropolisRunner:
    """In-place Metropolis chain on a mutable image list.

    Proposals and accept uniforms are drawn in blocks to keep the per-step
    cost O(1) in Python (O(cycle length) for the twisted model).
    """

    def __init__(self, model, n: int, rng: np.random.Generator, block: int = 4096):
        from .models import L1, L2

        self.n = n
        self.rng = rng
        self.block = block
        if isinstance(model, L1):
            beta = model.beta
            self._exp = lambda m, i, j: l1_exponent(m, i, j, beta)
        elif isinstance(model, L2):
            beta = model.beta
            self._exp = lambda m, i, j: l2_exponent(m, i, j, beta)
        elif isinstance(model, TwoParam):
            self._exp = lambda m, i, j: two_param_exponent(m, i, j, model)
        else:
            raise ValueError(f"no Metropolis sampler for {type(model).__name__}")
        self._buf: list = []
        self._pos = 0
        self.accepted = 0

    def _refill(self):
        ij = self.rng.integers(1, self.n + 1, size=(self.block, 2)).tolist()
        u = self.rng.random(self.block).tolist()
        self._buf = [(a, b, c) for (a, b), c in zip(ij, u)]
        self._pos = 0

    def advance(self, m: MutableSequence[int], steps: int) -> MutableSequence[int]:
        exp_ = self._exp
        for _ in range(steps):
            if self._pos >= len(self._buf):
                self._refill()
            i, j, u = self._buf[self._pos]
            self._pos += 1
            if i == j:
                continue
            e = exp_(m, i, j)
            if e >= 0 or u < math.exp(e):
                m[i - 1], m[j - 1] = m[j - 1], m[i - 1]
                self.accepted += 1
        return m

"""Hit-and-run kernels for the footrule, rank-correlation and weighted models.

Every step draws one auxiliary bound per position given the current state,
then resamples the state uniformly among permutations meeting all bounds.
The auxiliary ``u_i`` is uniform on ``[0, M_i]``; we write ``u_i = U_i * M_i``
with ``U_i`` uniform on ``(0, 1]`` and work with ``log U_i`` so ``M_i`` is never
formed (it overflows for large ``beta * n^2``). Callers may inject ``unif``
(the ``U_i``) to pin a step down in tests.
"""
from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from typing import Sequence

import numpy as np

from .perm import Permutation
from .restricted import BoundVector, Direction, place_lower, place_upper
from .rng import open_unit

_log = math.log


def _unif(rng, n, unif):
    if unif is None:
        return open_unit(rng, n)
    u = [float(x) for x in unif]
    if len(u) != n or any(not 0.0 < x <= 1.0 for x in u):
        raise ValueError("injected uniforms must be n values in (0, 1]")
    return u


def _geom(rng, p) -> list[int]:
    # failures before first success, P(G >= k) = (1 - p)^k
    return (rng.geometric(p) - 1).tolist()


# -- upper bounds (footrule family) -------------------------------------------

def l1_effective_bounds(m: Sequence[int], beta: float, rng=None, *, unif=None,
                        integer_bounds: bool = False) -> list[int]:
    """Integer upper bounds ``B_i = min(floor(b_i), n)`` for one footrule step.

    ``b_i = max(i, sigma(i)) - log(U_i) / (2 beta)``. With ``integer_bounds``
    the excess ``floor(-log(U_i) / (2 beta))`` is drawn directly from its
    geometric law instead.
    """
    n = len(m)
    if integer_bounds and unif is None:
        g = _geom(rng, np.full(n, -math.expm1(-2.0 * beta)))
        return [min((v if v > i else i) + gi, n) for i, (v, gi) in enumerate(zip(m, g), start=1)]
    c = 0.5 / beta
    u = _unif(rng, n, unif)
    out = []
    for i, (v, ui) in enumerate(zip(m, u), start=1):
        top = v if v > i else i
        out.append(min(top + int(-_log(ui) * c), n))
    return out


def l2_effective_bounds(m: Sequence[int], beta: float, rng=None, *, unif=None,
                        integer_bounds: bool = False) -> list[int]:
    """Integer lower bounds ``B_i = max(ceil(b_i), 1)`` for one rank-correlation step.

    ``b_i = sigma(i) + log(U_i) / (2 beta i)``.
    """
    n = len(m)
    if integer_bounds and unif is None:
        g = _geom(rng, -np.expm1(-2.0 * beta * np.arange(1, n + 1)))
        return [max(v - gi, 1) for v, gi in zip(m, g)]
    c = 0.5 / beta
    u = _unif(rng, n, unif)
    return [max(v - int(-_log(ui) * c / i), 1) for i, (v, ui) in enumerate(zip(m, u), start=1)]


def weighted_l1_effective_bounds(m: Sequence[int], beta: float, w: Sequence[float], rng=None, *,
                                 unif=None) -> list[int]:
    """``q_i = max{j : w(j) <= b_i}`` with ``b_i = max(w(i), w(sigma(i))) - log(U_i)/(2 beta)``."""
    n = len(m)
    c = 0.5 / beta
    u = _unif(rng, n, unif)
    out = []
    for i, (v, ui) in enumerate(zip(m, u)):
        wi, wv = w[i], w[v - 1]
        b = (wv if wv > wi else wi) - _log(ui) * c
        out.append(bisect_right(w, b))
    return out


def weighted_l2_effective_bounds(m: Sequence[int], beta: float, w: Sequence[float], rng=None, *,
                                 unif=None) -> list[int]:
    """``q_i = min{j : w(j) >= b_i}`` with ``b_i = w(sigma(i)) + log(U_i)/(2 beta w(i))``."""
    n = len(m)
    c = 0.5 / beta
    u = _unif(rng, n, unif)
    out = []
    for i, (v, ui) in enumerate(zip(m, u)):
        b = w[v - 1] + _log(ui) * c / w[i]
        out.append(bisect_left(w, b) + 1)
    return out


def _check_beta(beta):
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")


def _assert_upper(m, eff):
    assert all(v <= b for v, b in zip(m, eff)), "bounds exclude the current state"


def _assert_lower(m, eff):
    assert all(v >= b for v, b in zip(m, eff)), "bounds exclude the current state"


def step_l1(sigma: Permutation, beta: float, rng: np.random.Generator | None = None, *,
            unif=None, integer_bounds: bool = False) -> Permutation:
    """One hit-and-run step for the footrule model."""
    _check_beta(beta)
    m = sigma.mapping
    eff = l1_effective_bounds(m, beta, rng, unif=unif, integer_bounds=integer_bounds)
    _assert_upper(m, eff)
    return Permutation._trusted(place_upper(eff, rng.random(len(m)).tolist()))


def step_l2(sigma: Permutation, beta: float, rng: np.random.Generator | None = None, *,
            unif=None, integer_bounds: bool = False) -> Permutation:
    """One hit-and-run step for the rank-correlation model."""
    _check_beta(beta)
    m = sigma.mapping
    eff = l2_effective_bounds(m, beta, rng, unif=unif, integer_bounds=integer_bounds)
    _assert_lower(m, eff)
    return Permutation._trusted(place_lower(eff, rng.random(len(m)).tolist()))


def step_weighted_l1(sigma: Permutation, beta: float, w: Sequence[float],
                     rng: np.random.Generator | None = None, *, unif=None) -> Permutation:
    _check_beta(beta)
    m = sigma.mapping
    if len(w) != len(m):
        raise ValueError("weights and permutation differ in length")
    eff = weighted_l1_effective_bounds(m, beta, w, rng, unif=unif)
    _assert_upper(m, eff)
    return Permutation._trusted(place_upper(eff, rng.random(len(m)).tolist()))


def step_weighted_l2(sigma: Permutation, beta: float, w: Sequence[float],
                     rng: np.random.Generator | None = None, *, unif=None) -> Permutation:
    _check_beta(beta)
    m = sigma.mapping
    if len(w) != len(m):
        raise ValueError("weights and permutation differ in length")
    eff = weighted_l2_effective_bounds(m, beta, w, rng, unif=unif)
    _assert_lower(m, eff)
    return Permutation._trusted(place_lower(eff, rng.random(len(m)).tolist()))


def l1_bounds(sigma: Permutation, beta: float, rng=None, *, unif=None) -> BoundVector:
    """The auxiliary bound vector of a footrule step, for inspection."""
    return BoundVector(Direction.UPPER, tuple(l1_effective_bounds(sigma.mapping, beta, rng, unif=unif)))


def l2_bounds(sigma: Permutation, beta: float, rng=None, *, unif=None) -> BoundVector:
    return BoundVector(Direction.LOWER, tuple(l2_effective_bounds(sigma.mapping, beta, rng, unif=unif)))

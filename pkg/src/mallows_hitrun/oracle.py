"""Exact enumeration of small models, used as the test oracle."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats as sps
from scipy.special import logsumexp

from .lattice import all_bijections
from .models import L1, L2, ModelSpec, TwoParam, WeightedL1, WeightedL2, is_lattice, model_size
from .perm import Permutation, cycle_count

MAX_N = 8
MAX_LATTICE_POINTS = 9


class EnumerationLimit(ValueError):
    """The model is too large to enumerate."""


def state_key(state) -> tuple:
    return state.mapping


@dataclass
class ExactModelTable:
    n: int
    states: list
    log_weights: np.ndarray
    log_Z: float
    probabilities: np.ndarray
    index: dict = field(repr=False)

    def prob(self, state) -> float:
        return float(self.probabilities[self.index[state_key(state)]])

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Indices of ``size`` exact draws."""
        return rng.choice(len(self.states), size=size, p=self.probabilities)


def enumerate_states(model: ModelSpec, n: int | None = None) -> list:
    if is_lattice(model):
        if model.N ** model.d > MAX_LATTICE_POINTS:
            raise EnumerationLimit("enumeration limit exceeded: N^d must be <= 9")
        return list(all_bijections(model.N, model.d))
    size = model_size(model, n)
    if size > MAX_N:
        raise EnumerationLimit(f"enumeration limit exceeded: n={size} > {MAX_N}")
    return [Permutation._trusted(p) for p in itertools.permutations(range(1, size + 1))]


def table_from_log_weights(states: list, log_weights: Sequence[float]) -> ExactModelTable:
    lw = np.asarray(log_weights, dtype=float)
    log_z = float(logsumexp(lw))
    probs = np.exp(lw - log_z)
    probs /= probs.sum()
    index = {state_key(s): k for k, s in enumerate(states)}
    n = states[0].n if isinstance(states[0], Permutation) else len(states[0].mapping)
    return ExactModelTable(n, states, lw, log_z, probs, index)


def enumerate_model(model: ModelSpec, n: int | None = None) -> ExactModelTable:
    """Exact table of ``model`` over all states in lexicographic order."""
    states = enumerate_states(model, n)
    return table_from_log_weights(states, [model.log_weight(s) for s in states])


def uniform_table(n: int) -> ExactModelTable:
    states = [Permutation._trusted(p) for p in itertools.permutations(range(1, n + 1))]
    return table_from_log_weights(states, np.zeros(len(states)))


def exact_expectation(table: ExactModelTable, statistic: Callable) -> float:
    vals = np.array([float(statistic(s)) for s in table.states])
    return float(np.dot(table.probabilities, vals))


def tv_distance(p: Sequence[float], q: Sequence[float]) -> float:
    """Half the L1 distance between two distributions on the same support."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {q.shape}")
    return float(0.5 * np.abs(p - q).sum())


def counts_of(table: ExactModelTable, states) -> np.ndarray:
    counts = np.zeros(len(table.states), dtype=np.int64)
    idx = table.index
    for s in states:
        counts[idx[state_key(s)]] += 1
    return counts


def empirical(table: ExactModelTable, states) -> np.ndarray:
    c = counts_of(table, states)
    return c / c.sum()


@dataclass(frozen=True)
class GofResult:
    statistic: float
    dof: int
    p_value: float
    tv: float
    draws: int

    def passed(self, alpha: float = 1e-3) -> bool:
        return self.p_value >= alpha


def chi_square_gof(counts: Sequence[int], probs: Sequence[float]) -> GofResult:
    """Pearson goodness of fit of ``counts`` against ``probs``.

    States with zero probability must have zero counts; they are dropped.
    """
    counts = np.asarray(counts, dtype=float)
    probs = np.asarray(probs, dtype=float)
    total = counts.sum()
    support = probs > 0
    if np.any(counts[~support] > 0):
        return GofResult(np.inf, int(support.sum()) - 1, 0.0, tv_distance(counts / total, probs), int(total))
    c, p = counts[support], probs[support]
    p = p / p.sum()
    res = sps.chisquare(c, total * p)
    return GofResult(float(res.statistic), len(c) - 1, float(res.pvalue),
                     tv_distance(counts / total, probs), int(total))


# -- exact hit-and-run kernels ---------------------------------------------------
#
# The restricted set seen by a hit-and-run step depends on the auxiliary
# variables only through the integer bounds, whose laws are explicit. The
# one-step kernel is therefore a finite mixture and can be tabulated exactly.

MAX_KERNEL_N = 5


def _bound_pmfs(model: ModelSpec, m: Sequence[int]) -> tuple[str, list[np.ndarray]]:
    """Per-position law of the integer bound given the state ``m``.

    Entry ``v - 1`` of each array is the probability that the bound equals ``v``.
    """
    n = len(m)
    vals = np.arange(1, n + 1)
    pmfs = []
    if isinstance(model, (L1, TwoParam)):
        beta = model.beta if isinstance(model, L1) else model.beta1
        for i in range(1, n + 1):
            lo = max(i, m[i - 1])
            # P(B >= v) = exp(-2 beta (v - lo)) for v >= lo
            tail = np.where(vals >= lo, np.exp(-2 * beta * np.maximum(vals - lo, 0)), 1.0)
            pmfs.append(tail - np.append(tail[1:], 0.0))
        return "upper", pmfs
    if isinstance(model, L2):
        for i in range(1, n + 1):
            hi = m[i - 1]
            # P(B <= v) = exp(-2 beta i (hi - v)) for v <= hi
            head = np.where(vals <= hi, np.exp(-2 * model.beta * i * np.maximum(hi - vals, 0)), 1.0)
            pmfs.append(head - np.concatenate([[0.0], head[:-1]]))
        return "lower", pmfs
    if isinstance(model, WeightedL1):
        w = np.asarray(model.weights, dtype=float)
        for i in range(1, n + 1):
            top = max(w[i - 1], w[m[i - 1] - 1])
            tail = np.minimum(1.0, np.exp(-2 * model.beta * (w - top)))
            pmfs.append(tail - np.append(tail[1:], 0.0))
        return "upper", pmfs
    if isinstance(model, WeightedL2):
        w = np.asarray(model.weights, dtype=float)
        for i in range(1, n + 1):
            head = np.minimum(1.0, np.exp(-2 * model.beta * w[i - 1] * (w[m[i - 1] - 1] - w)))
            pmfs.append(head - np.concatenate([[0.0], head[:-1]]))
        return "lower", pmfs
    raise ValueError(f"no exact kernel for {type(model).__name__}")


def exact_hitrun_kernel(model: ModelSpec, n: int | None = None) -> np.ndarray:
    """Transition matrix of one hit-and-run step over the lexicographic states.

    Supports L1, L2, WeightedL1, WeightedL2 and TwoParam for n <= 5.
    """
    if is_lattice(model):
        raise ValueError("no exact kernel for lattice models")
    size = model_size(model, n)
    if size > MAX_KERNEL_N:
        raise EnumerationLimit(f"enumeration limit exceeded: n={size} > {MAX_KERNEL_N}")
    states = enumerate_states(model, size)
    perms = np.array([s.mapping for s in states])
    bounds = np.array(list(itertools.product(range(1, size + 1), repeat=size)))
    beta2 = model.beta2 if isinstance(model, TwoParam) else 0.0
    target = np.exp(beta2 * np.array([cycle_count(s) for s in states], dtype=float))
    direction, _ = _bound_pmfs(model, states[0].mapping)
    if direction == "upper":
        admits = np.all(perms[None, :, :] <= bounds[:, None, :], axis=2)
    else:
        admits = np.all(perms[None, :, :] >= bounds[:, None, :], axis=2)
    restricted = admits * target[None, :]
    mass = restricted.sum(axis=1, keepdims=True)
    restricted = np.divide(restricted, mass, out=np.zeros_like(restricted), where=mass > 0)
    K = np.empty((len(states), len(states)))
    for r, s in enumerate(states):
        _, pmfs = _bound_pmfs(model, s.mapping)
        joint = pmfs[0]
        for p in pmfs[1:]:
            joint = np.multiply.outer(joint, p)
        K[r] = joint.ravel() @ restricted
    return K


def exact_tv_profile(K: np.ndarray, pi: np.ndarray, start: int, steps: int) -> list[float]:
    """Exact TV to ``pi`` after ``0..steps`` applications of ``K`` from ``start``."""
    law = np.zeros(len(pi))
    law[start] = 1.0
    out = [tv_distance(law, pi)]
    for _ in range(steps):
        law = law @ K
        out.append(tv_distance(law, pi))
    return out

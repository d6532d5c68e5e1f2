"""Chain diagnostics: autocorrelation, effective sample size, the coupling
experiment for one-sided restrictions, and empirical mixing profiles."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .chain import ChainConfig, lattice_statistics, make_kernel, run_chain
from .lattice import LatticeBijection
from .models import ModelSpec, is_lattice
from .oracle import enumerate_model, exact_hitrun_kernel, exact_tv_profile, state_key, tv_distance
from .perm import Permutation, Stat, adjacent_transposition_distance, identity, reverse, statistics
from .restricted import BoundVector, Direction, InfeasibleBounds, feasible, place_lower
from .rng import make_stream


class ConstantSeries(ValueError):
    """A series with zero sample variance has no autocorrelation."""


def autocorrelation(series: Sequence[float], max_lag: int) -> np.ndarray:
    """Sample autocorrelations at lags ``0..max_lag``.

    ``r_k = sum_t (x_t - m)(x_{t+k} - m) / sum_t (x_t - m)^2``.
    """
    x = np.asarray(series, dtype=float)
    T = len(x)
    if max_lag < 0 or T <= max_lag:
        raise ValueError(f"series of length {T} is too short for max_lag={max_lag}")
    x = x - x.mean()
    denom = float(np.dot(x, x))
    if denom == 0.0:
        raise ConstantSeries("series has zero variance")
    return np.array([np.dot(x[: T - k], x[k:]) / denom for k in range(max_lag + 1)])


def effective_sample_size(series: Sequence[float], max_lag: int | None = None) -> float:
    """``T / (1 + 2 sum_k r_k)`` summing lags until the first negative ``r_k``.

    Clamped to ``[1, T]``.
    """
    T = len(series)
    if max_lag is None:
        max_lag = min(T - 1, 1000)
    r = autocorrelation(series, max_lag)
    s = 0.0
    for rk in r[1:]:
        if rk < 0:
            break
        s += rk
    ess = T / (1.0 + 2.0 * s)
    return float(min(max(ess, 1.0), T))


# -- coupling of uniform laws on two one-sided restricted sets --------------

@dataclass(frozen=True)
class CouplingOutcome:
    x: Permutation
    x_prime: Permutation
    rho: int


def _couple(B: Sequence[int], k: int, bk_alt: int, u: Sequence[float]) -> tuple[list[int], list[int]]:
    """Coupled placement for lower bounds ``B`` and ``B`` with ``B_k := bk_alt``.

    Requires ``bk_alt < B[k]`` (0-based ``k``). Symbols are placed ``1..n``;
    the two partial placements keep a common pool of free eligible places
    plus at most one extra place each. Returns the inverse maps
    (symbol -> place) of the first and second draw.
    """
    n = len(B)
    bk = B[k]
    buckets: list[list[int]] = [[] for _ in range(n + 2)]
    for p, b in enumerate(B):
        if p != k:
            buckets[b].append(p)
    # common pool: swap-with-last list plus position index
    items: list[int] = []
    where = [-1] * n

    def take(idx):
        p = items[idx]
        last = items.pop()
        if last != p:
            items[idx] = last
            where[last] = idx
        return p

    extra = -1        # free in the first draw only
    extra_p = -1      # free in the second draw only
    xinv = [0] * n
    xpinv = [0] * n
    for l in range(1, n + 1):
        for p in buckets[l]:
            where[p] = len(items)
            items.append(p)
        if l == bk_alt:
            extra_p = k
        if l == bk:
            if extra_p == k:
                extra_p = -1
                where[k] = len(items)
                items.append(k)
            else:
                extra = k
        m = len(items)
        r1 = u[2 * l - 2]
        if extra_p < 0:
            # identical choice sets
            if m == 0:
                raise InfeasibleBounds(f"no place for symbol {l}")
            xinv[l - 1] = xpinv[l - 1] = take(int(r1 * m))
        elif extra < 0:
            # second draw has one more choice
            if m == 0:
                raise InfeasibleBounds(f"no place for symbol {l} in the first set")
            r = int(r1 * (m + 1))
            if r < m:
                xinv[l - 1] = xpinv[l - 1] = take(r)
            else:
                q = take(int(u[2 * l - 1] * m))
                xinv[l - 1] = q
                xpinv[l - 1] = extra_p
                extra_p = q
        else:
            # one private choice each, matched together
            r = int(r1 * (m + 1))
            if r < m:
                xinv[l - 1] = xpinv[l - 1] = take(r)
            else:
                xinv[l - 1] = extra
                xpinv[l - 1] = extra_p
                extra = extra_p = -1
    return xinv, xpinv


def _from_inverse(inv: Sequence[int]) -> Permutation:
    m = [0] * len(inv)
    for sym, p in enumerate(inv, start=1):
        m[p] = sym
    return Permutation._trusted(m)


def coupling_lemma_experiment(bounds: BoundVector, k: int, b_k_prime: int,
                              rng: np.random.Generator) -> CouplingOutcome:
    """Coupled uniform draws ``X`` from ``{tau >= B}`` and ``X'`` from the same
    set with the bound at position ``k`` (1-based) replaced by ``b_k_prime``.

    Shares every choice it can; ``rho`` is the adjacent-transposition
    distance between the two draws, which never exceeds ``2n``.
    """
    if bounds.direction is not Direction.LOWER:
        raise ValueError("the coupling is defined for lower bounds")
    n = bounds.n
    if not 1 <= k <= n:
        raise IndexError(f"k={k} outside 1..{n}")
    B = list(bounds.effective)
    bkp = min(max(int(b_k_prime), 1), n)
    B_alt = B.copy()
    B_alt[k - 1] = bkp
    if not feasible(bounds) or not feasible(BoundVector(Direction.LOWER, tuple(B_alt))):
        raise InfeasibleBounds("both restricted sets must be nonempty")
    u = rng.random(2 * n).tolist()
    if bkp == B[k - 1]:
        x = Permutation._trusted(place_lower(B, u[:n]))
        return CouplingOutcome(x, x, 0)
    if bkp < B[k - 1]:
        xinv, xpinv = _couple(B, k - 1, bkp, u)
    else:
        xpinv, xinv = _couple(B_alt, k - 1, B[k - 1], u)
    x, xp = _from_inverse(xinv), _from_inverse(xpinv)
    return CouplingOutcome(x, xp, adjacent_transposition_distance(x, xp))


def random_coupling_instance(n: int, rng: np.random.Generator) -> tuple[BoundVector, int, int]:
    """Random feasible ``(B, k, b'_k)``: ``B`` dominated by a random permutation,
    ``b'_k`` uniform on ``[n]`` subject to feasibility."""
    sigma = rng.permutation(n) + 1
    B = (np.floor(rng.random(n) * sigma).astype(np.int64) + 1).tolist()
    k = int(rng.integers(1, n + 1))
    while True:
        bkp = int(rng.integers(1, n + 1))
        alt = B.copy()
        alt[k - 1] = bkp
        if feasible(BoundVector(Direction.LOWER, tuple(alt))):
            return BoundVector(Direction.LOWER, tuple(B)), k, bkp


def _lower_feasible(B: Sequence[int]) -> bool:
    n = len(B)
    hist = [0] * (n + 1)
    for b in B:
        hist[b] += 1
    at_most = 0
    for l in range(1, n + 1):
        at_most += hist[l]
        if at_most < l:
            return False
    return True


@dataclass(frozen=True)
class CouplingBatch:
    n: int
    rho: np.ndarray
    violations: int

    @property
    def max_rho(self) -> int:
        return int(self.rho.max()) if len(self.rho) else 0


def coupling_batch(n: int, runs: int, rng: np.random.Generator) -> CouplingBatch:
    """``runs`` coupling experiments on random instances of size ``n``.

    Same instances and coupling as ``random_coupling_instance`` followed by
    ``coupling_lemma_experiment``, without the per-run object overhead.
    ``violations`` counts draws of ``X`` that break ``B`` or ``X'`` that break
    the modified bounds.
    """
    rho = np.zeros(runs, dtype=np.int64)
    bad = 0
    for r in range(runs):
        sigma = rng.permutation(n) + 1
        B = (np.floor(rng.random(n) * sigma).astype(np.int64) + 1).tolist()
        k = int(rng.integers(0, n))
        while True:
            bkp = int(rng.integers(1, n + 1))
            alt = B.copy()
            alt[k] = bkp
            if _lower_feasible(alt):
                break
        u = rng.random(2 * n).tolist()
        if bkp == B[k]:
            continue
        if bkp < B[k]:
            xinv, xpinv = _couple(B, k, bkp, u)
        else:
            xpinv, xinv = _couple(alt, k, B[k], u)
        xi = np.asarray(xinv)
        xpi = np.asarray(xpinv)
        syms = np.arange(1, n + 1)
        x = np.empty(n, dtype=np.int64)
        x[xi] = syms
        xp = np.empty(n, dtype=np.int64)
        xp[xpi] = syms
        if np.any(x < np.asarray(B)) or np.any(xp < np.asarray(alt)):
            bad += 1
        # X' o X^{-1} as an image list
        a = xp[xi]
        rho[r] = np.count_nonzero(np.triu(a[:, None] > a[None, :], 1))
    return CouplingBatch(n, rho, bad)


# -- mixing profiles ------------------------------------------------------------

def _start_states(model: ModelSpec, n: int):
    if is_lattice(model):
        ident = LatticeBijection.identity(model.N, model.d)
        rev = LatticeBijection.from_linear(model.N, model.d, list(range(model.N ** model.d, 0, -1)))
        return {"identity": ident, "reverse": rev}
    return {"identity": identity(n), "reverse": reverse(n)}


def exact_mixing_profile(model: ModelSpec, n: int | None, max_steps: int, replications: int, seed: int = 0,
                         sampler: str = "hitrun") -> list[tuple[int, float]]:
    """Full-state TV to the exact law after each step, worst of the two starts.

    The law at step ``t`` is estimated from ``replications`` independent
    chains; the returned TV therefore carries a small positive bias of order
    ``sqrt(#states / replications)``.
    """
    table = enumerate_model(model, n)
    size = len(table.states)
    worst = np.zeros(max_steps + 1)
    for s_idx, (name, start) in enumerate(_start_states(model, table.n).items()):
        counts = np.zeros((max_steps + 1, size))
        counts[0, table.index[state_key(start)]] = replications
        lattice_model = is_lattice(model)
        for r in range(replications):
            rng = make_stream(seed, r, 100 + s_idx)
            advance = make_kernel(model, rng, sampler, table.n)
            state = start if lattice_model else list(start.mapping)
            for t in range(1, max_steps + 1):
                state = advance(state, 1)
                key = state.mapping if lattice_model else tuple(state)
                counts[t, table.index[key]] += 1
        tv = [tv_distance(counts[t] / replications, table.probabilities) for t in range(max_steps + 1)]
        worst = np.maximum(worst, tv)
    return [(t, float(v)) for t, v in enumerate(worst)]


def kernel_mixing_profile(model: ModelSpec, n: int, max_steps: int) -> list[tuple[int, float]]:
    """Exact TV after each hit-and-run step from the worse of the two starts,
    computed from the tabulated kernel (no sampling noise)."""
    table = enumerate_model(model, n)
    K = exact_hitrun_kernel(model, n)
    worst = np.zeros(max_steps + 1)
    for start in _start_states(model, table.n).values():
        worst = np.maximum(worst, exact_tv_profile(K, table.probabilities, table.index[state_key(start)], max_steps))
    return [(t, float(v)) for t, v in enumerate(worst)]


def _stat_value(rec, stat: Stat):
    return {
        Stat.T1: rec.t1_fixed_points, Stat.T2: rec.t2_cycle_len_mid, Stat.T3: rec.t3_lis,
        Stat.H: rec.h_l1, Stat.H2: rec.h_l2, Stat.C: rec.cycles, Stat.MEAN_DISP: rec.mean_displacement,
    }[stat]


def proxy_mixing_profile(model: ModelSpec, n: int, max_steps: int, replications: int, seed: int = 0,
                         stat: Stat = Stat.T1, reference_steps: int = 2000, sampler: str = "hitrun"
                         ) -> list[tuple[int, float]]:
    """TV between the law of one statistic at step ``t`` and a long-run reference.

    Used when the state space is too large to enumerate. The reference is
    the statistic's empirical law along a separate long chain after
    ``reference_steps // 4`` burn-in steps. The statistic TV lower-bounds the
    full-state TV only up to sampling noise.
    """
    starts = _start_states(model, n)
    ref_cfg = ChainConfig(seed=seed, steps=reference_steps, burn_in=reference_steps // 4)
    ref = run_chain(model, starts["identity"], ref_cfg, {stat}, sampler=sampler, replication=10 ** 6)
    ref_vals = [_stat_value(rec, stat) for rec in ref.records]
    worst = np.zeros(max_steps + 1)
    for s_idx, (name, start) in enumerate(starts.items()):
        per_step: list[list] = [[] for _ in range(max_steps + 1)]
        cfg = ChainConfig(seed=seed, steps=max_steps, burn_in=0)
        for r in range(replications):
            res = run_chain(model, start, cfg, {stat}, sampler=sampler, replication=r + 1000 * (s_idx + 1))
            for t, rec in zip(res.steps, res.records):
                per_step[t].append(_stat_value(rec, stat))
        s0 = lattice_statistics(start, {stat}) if is_lattice(model) else statistics(start, {stat})
        per_step[0] = [_stat_value(s0, stat)] * replications
        tv = [_binned_tv(vals, ref_vals) for vals in per_step]
        worst = np.maximum(worst, tv)
    return [(t, float(v)) for t, v in enumerate(worst)]


def _binned_tv(a: Sequence[float], b: Sequence[float]) -> float:
    support = sorted(set(a) | set(b))
    pos = {v: k for k, v in enumerate(support)}
    pa = np.zeros(len(support))
    pb = np.zeros(len(support))
    for v in a:
        pa[pos[v]] += 1
    for v in b:
        pb[pos[v]] += 1
    return tv_distance(pa / pa.sum(), pb / pb.sum())


def empirical_mixing_profile(model: ModelSpec, n: int | None, cfg: ChainConfig, mode: str = "exact",
                             stat: Stat = Stat.T1, sampler: str = "hitrun") -> list[tuple[int, float]]:
    """``(step, tv)`` for ``step = 0..cfg.steps`` over ``cfg.replications`` chains
    per start, taking the worse of the identity and reversal starts."""
    if mode == "exact":
        return exact_mixing_profile(model, n, cfg.steps, cfg.replications, cfg.seed, sampler)
    if mode == "kernel":
        if sampler != "hitrun":
            raise ValueError("kernel mode is only available for the hitrun sampler")
        return kernel_mixing_profile(model, n, cfg.steps)
    if mode == "proxy":
        return proxy_mixing_profile(model, n, cfg.steps, cfg.replications, cfg.seed, stat, sampler=sampler)
    raise ValueError(f"unknown mode {mode!r}")


def mixing_step_bound(n: int, c: float = 2.0) -> int:
    """``ceil(3 log(2n) / log c)``, the step budget for TV below 1/4."""
    return math.ceil(3 * math.log(2 * n) / math.log(c))

"""Chain runner shared by every model and sampler."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from . import hitrun, lattice, metropolis, twisted
from .lattice import LatticeBijection
from .models import (L1, L2, LatticeL1, LatticeL2, ModelSpec, TwoParam, WeightedL1, WeightedL2,
                     is_lattice)
from .perm import (ALL_STATS, Permutation, Stat, StatisticsRecord, cycle_count,
                   cycle_length_containing, fixed_points, lis_length, statistics)
from .restricted import place_lower, place_upper
from .rng import make_stream

SAMPLERS = ("hitrun", "metropolis")


@dataclass(frozen=True)
class ChainConfig:
    seed: int = 0
    steps: int = 0
    burn_in: int = 0
    thinning: int = 1
    replications: int = 1

    def __post_init__(self):
        if self.steps < 0 or self.burn_in < 0 or self.replications < 1:
            raise ValueError("steps and burn_in must be >= 0, replications >= 1")
        if self.steps < self.burn_in:
            raise ValueError("steps must be >= burn_in")
        if self.thinning < 1:
            raise ValueError("thinning must be >= 1")

    def retained_steps(self) -> range:
        """Step indices whose post-step state is recorded."""
        return range(self.burn_in + self.thinning, self.steps + 1, self.thinning)


@dataclass
class ChainResult:
    steps: list[int]
    records: list[StatisticsRecord]
    samples: list | None = None
    final: object = None
    accepted: int | None = None


def make_kernel(model: ModelSpec, rng: np.random.Generator, sampler: str = "hitrun", n: int | None = None
                ) -> Callable[[object, int], object]:
    """Return ``advance(state, steps) -> state`` for the chosen sampler.

    The state is a list of images for permutation models and a list of
    coordinate columns for lattice models.
    """
    if sampler not in SAMPLERS:
        raise ValueError(f"unknown sampler {sampler!r}")
    if sampler == "metropolis":
        if is_lattice(model) or isinstance(model, (WeightedL1, WeightedL2)):
            raise ValueError(f"no Metropolis sampler for {type(model).__name__}")
        runner = metropolis.MetropolisRunner(model, n, rng)
        return runner.advance

    if isinstance(model, L1):
        beta = model.beta

        def one(m):
            return place_upper(hitrun.l1_effective_bounds(m, beta, rng), rng.random(len(m)).tolist())
    elif isinstance(model, L2):
        beta = model.beta

        def one(m):
            return place_lower(hitrun.l2_effective_bounds(m, beta, rng), rng.random(len(m)).tolist())
    elif isinstance(model, WeightedL1):
        beta, w = model.beta, model.weights

        def one(m):
            return place_upper(hitrun.weighted_l1_effective_bounds(m, beta, w, rng), rng.random(len(m)).tolist())
    elif isinstance(model, WeightedL2):
        beta, w = model.beta, model.weights

        def one(m):
            return place_lower(hitrun.weighted_l2_effective_bounds(m, beta, w, rng), rng.random(len(m)).tolist())
    elif isinstance(model, TwoParam):
        beta1, beta2 = model.beta1, model.beta2

        def one(m):
            n_ = len(m)
            eff = hitrun.l1_effective_bounds(m, beta1, rng)
            u = rng.random(2 * n_).tolist()
            return twisted.place_twisted(eff, beta2, u[:n_], u[n_:])
    elif isinstance(model, (LatticeL1, LatticeL2)):
        sweep = lattice.gibbs_sweep_l1 if isinstance(model, LatticeL1) else lattice.gibbs_sweep_l2
        beta = model.beta

        def one(state):
            return sweep(state, beta, rng)
    else:
        raise ValueError(f"unsupported model {model!r}")

    def advance(state, steps):
        for _ in range(steps):
            state = one(state)
        return state

    return advance


def _perm_stats(m, which) -> StatisticsRecord:
    return statistics(Permutation._trusted(m), which)


def lattice_statistics(sigma: LatticeBijection, which: Iterable[Stat] = ALL_STATS) -> StatisticsRecord:
    """Statistics of a lattice state.

    Cycle statistics and the LIS use the bijection as a permutation of the
    row-major linear indices; energies are the lattice energies.
    """
    which = frozenset(which)
    lin = sigma.linear()
    n = lin.n
    vals: dict = {}
    if Stat.T1 in which:
        vals["t1_fixed_points"] = fixed_points(lin)
    if Stat.T2 in which:
        vals["t2_cycle_len_mid"] = cycle_length_containing(lin, math.ceil(n / 2))
    if Stat.T3 in which:
        vals["t3_lis"] = lis_length(lin)
    if Stat.H in which or Stat.MEAN_DISP in which:
        h = lattice.lattice_l1_energy(sigma)
        if Stat.H in which:
            vals["h_l1"] = h
        if Stat.MEAN_DISP in which:
            vals["mean_displacement"] = h / n
    if Stat.H2 in which:
        vals["h_l2"] = lattice.lattice_l2_energy(sigma)
    if Stat.C in which:
        vals["cycles"] = cycle_count(lin)
    return StatisticsRecord(**vals)


def run_chain(model: ModelSpec, start, cfg: ChainConfig, collect: Iterable[Stat] = ALL_STATS, *,
              sampler: str = "hitrun", keep_samples: bool = False, replication: int = 0,
              rng: np.random.Generator | None = None) -> ChainResult:
    """Run one chain and record statistics after each retained step.

    Deterministic given ``(cfg.seed, replication)``. Records are taken after
    steps ``burn_in + thinning, burn_in + 2*thinning, ..., <= steps``.
    """
    collect = frozenset(collect)
    if rng is None:
        rng = make_stream(cfg.seed, replication)
    if is_lattice(model):
        if not isinstance(start, LatticeBijection):
            raise ValueError("lattice models need a LatticeBijection start")
        if (start.n_side, start.dim) != (model.N, model.d):
            raise ValueError("start does not match the lattice size")
        if sampler != "hitrun":
            raise ValueError("lattice models only support the hitrun sampler")
        n = model.N ** model.d
        state = start
        to_stats = lambda s: lattice_statistics(s, collect)  # noqa: E731
        to_sample = lambda s: s  # noqa: E731
    else:
        if not isinstance(start, Permutation):
            start = Permutation(tuple(start))
        n = start.n
        if isinstance(model, (WeightedL1, WeightedL2)) and len(model.weights) != n:
            raise ValueError(f"weights have length {len(model.weights)} but n={n}")
        state = list(start.mapping)
        to_stats = lambda s: _perm_stats(s, collect)  # noqa: E731
        to_sample = lambda s: Permutation._trusted(s)  # noqa: E731

    advance = make_kernel(model, rng, sampler, n)
    steps_out: list[int] = []
    records: list[StatisticsRecord] = []
    samples: list | None = [] if keep_samples else None
    t = 0
    for target in cfg.retained_steps():
        state = advance(state, target - t)
        t = target
        steps_out.append(t)
        records.append(to_stats(state))
        if samples is not None:
            samples.append(to_sample(state))
    if t < cfg.steps:
        state = advance(state, cfg.steps - t)
    result = ChainResult(steps_out, records, samples, to_sample(state) if not is_lattice(model) else state)
    runner = getattr(advance, "__self__", None)
    if runner is not None:
        result.accepted = runner.accepted
    return result


def _run_one(args):
    model, start, cfg, collect, sampler, keep, rep = args
    return run_chain(model, start, cfg, collect, sampler=sampler, keep_samples=keep, replication=rep)


def run_replications(model: ModelSpec, start, cfg: ChainConfig, collect: Iterable[Stat] = ALL_STATS, *,
                     sampler: str = "hitrun", keep_samples: bool = False, workers: int = 1
                     ) -> list[ChainResult]:
    """Independent chains ``0..replications-1``, each on its own stream.

    Output is ordered by replication index and does not depend on ``workers``.
    """
    jobs = [(model, start, cfg, frozenset(collect), sampler, keep_samples, r) for r in range(cfg.replications)]
    if workers <= 1 or cfg.replications == 1:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_run_one, jobs))


def hitrun_step(model: ModelSpec, state, rng: np.random.Generator):
    """One hit-and-run step of ``model`` on a public state value."""
    if isinstance(model, L1):
        return hitrun.step_l1(state, model.beta, rng)
    if isinstance(model, L2):
        return hitrun.step_l2(state, model.beta, rng)
    if isinstance(model, WeightedL1):
        return hitrun.step_weighted_l1(state, model.beta, model.weights, rng)
    if isinstance(model, WeightedL2):
        return hitrun.step_weighted_l2(state, model.beta, model.weights, rng)
    if isinstance(model, TwoParam):
        return twisted.step_two_param(state, model, rng)
    if isinstance(model, LatticeL1):
        return lattice.gibbs_sweep_l1(state, model.beta, rng)
    if isinstance(model, LatticeL2):
        return lattice.gibbs_sweep_l2(state, model.beta, rng)
    raise ValueError(f"unsupported model {model!r}")


def metropolis_step(model: ModelSpec, state: Permutation, rng: np.random.Generator) -> Permutation:
    if isinstance(model, L1):
        return metropolis.metro_step_l1(state, model.beta, rng)
    if isinstance(model, L2):
        return metropolis.metro_step_l2(state, model.beta, rng)
    if isinstance(model, TwoParam):
        return metropolis.metro_step_two_param(state, model, rng)
    raise ValueError(f"no Metropolis sampler for {type(model).__name__}")

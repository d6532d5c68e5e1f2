"""Hit-and-run and Metropolis samplers for Mallows permutation models with
footrule and rank-correlation distances, plus exact small-n oracles."""

from .chain import ChainConfig, ChainResult, hitrun_step, metropolis_step, run_chain, run_replications
from .hitrun import step_l1, step_l2, step_weighted_l1, step_weighted_l2
from .lattice import LatticeBijection, gibbs_sweep_l1, gibbs_sweep_l2, lattice_l1_energy, lattice_l2_energy
from .metropolis import metro_step_l1, metro_step_l2, metro_step_two_param
from .models import L1, L2, LatticeL1, LatticeL2, ModelSpec, TwoParam, WeightedL1, WeightedL2
from .perm import Permutation, Stat, StatisticsRecord, identity, reverse
from .restricted import (BoundVector, Direction, count_restricted, feasible, sample_uniform_lower,
                         sample_uniform_upper)
from .twisted import sample_twisted_restricted, step_two_param, two_param_log_weight

__version__ = "0.1.0"

__all__ = [
    "BoundVector", "ChainConfig", "ChainResult", "Direction", "L1", "L2", "LatticeBijection", "LatticeL1",
    "LatticeL2", "ModelSpec", "Permutation", "Stat", "StatisticsRecord", "TwoParam", "WeightedL1", "WeightedL2",
    "count_restricted", "feasible", "gibbs_sweep_l1", "gibbs_sweep_l2", "hitrun_step", "identity",
    "lattice_l1_energy", "lattice_l2_energy", "metro_step_l1", "metro_step_l2", "metro_step_two_param",
    "metropolis_step", "reverse", "run_chain", "run_replications", "sample_twisted_restricted",
    "sample_uniform_lower", "sample_uniform_upper", "step_l1", "step_l2", "step_two_param", "step_weighted_l1",
    "step_weighted_l2", "two_param_log_weight",
]

"""Target distributions.

Each model is a small frozen dataclass; ``log_weight`` returns the
unnormalized log-probability of a state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

from .perm import Permutation, cycle_count, positive_displacement_sum, cross_term


def _check_beta(beta: float, name: str = "beta") -> None:
    if not (beta > 0 and math.isfinite(beta)):
        raise ValueError(f"{name} must be a positive finite number, got {beta}")


def _check_weights(weights: Sequence[float]) -> tuple[float, ...]:
    w = tuple(float(x) for x in weights)
    if not w:
        raise ValueError("weights must be non-empty")
    if any(not (x > 0 and math.isfinite(x)) for x in w):
        raise ValueError("weights must be positive and finite")
    if any(a > b for a, b in zip(w, w[1:])):
        raise ValueError("weights must be non-decreasing")
    return w


@dataclass(frozen=True)
class L1:
    """Footrule model, ``P(sigma) ~ exp(-beta * sum |sigma(i) - i|)``."""

    beta: float

    def __post_init__(self):
        _check_beta(self.beta)

    def log_weight(self, sigma: Permutation) -> float:
        return -2.0 * self.beta * positive_displacement_sum(sigma)


@dataclass(frozen=True)
class L2:
    """Rank-correlation model, ``P(sigma) ~ exp(-beta * sum (sigma(i) - i)^2)``."""

    beta: float

    def __post_init__(self):
        _check_beta(self.beta)

    def log_weight(self, sigma: Permutation) -> float:
        n = sigma.n
        sq = n * (n + 1) * (2 * n + 1) // 6
        return -self.beta * (2 * sq - 2 * cross_term(sigma))


@dataclass(frozen=True)
class WeightedL1:
    beta: float
    weights: tuple[float, ...]

    def __post_init__(self):
        _check_beta(self.beta)
        object.__setattr__(self, "weights", _check_weights(self.weights))

    def log_weight(self, sigma: Permutation) -> float:
        w = self.weights
        return -self.beta * sum(abs(w[v - 1] - w[i]) for i, v in enumerate(sigma.mapping))


@dataclass(frozen=True)
class WeightedL2:
    beta: float
    weights: tuple[float, ...]

    def __post_init__(self):
        _check_beta(self.beta)
        object.__setattr__(self, "weights", _check_weights(self.weights))

    def log_weight(self, sigma: Permutation) -> float:
        w = self.weights
        return -self.beta * sum((w[v - 1] - w[i]) ** 2 for i, v in enumerate(sigma.mapping))


@dataclass(frozen=True)
class TwoParam:
    """Footrule model twisted by cycle count:
    ``P(sigma) ~ exp(-beta1 * H(sigma, Id) + beta2 * C(sigma))``."""

    beta1: float
    beta2: float = 0.0

    def __post_init__(self):
        _check_beta(self.beta1, "beta1")
        if not (self.beta2 >= 0 and math.isfinite(self.beta2)):
            raise ValueError(f"beta2 must be non-negative, got {self.beta2}")

    def log_weight(self, sigma: Permutation) -> float:
        return two_param_log_weight(sigma, self)


@dataclass(frozen=True)
class LatticeL1:
    beta: float
    N: int
    d: int

    def __post_init__(self):
        _check_beta(self.beta)
        if self.N < 1 or self.d < 1:
            raise ValueError("lattice needs N >= 1 and d >= 1")

    def log_weight(self, sigma) -> float:
        from .lattice import lattice_l1_energy

        return -self.beta * lattice_l1_energy(sigma)


@dataclass(frozen=True)
class LatticeL2:
    beta: float
    N: int
    d: int

    def __post_init__(self):
        _check_beta(self.beta)
        if self.N < 1 or self.d < 1:
            raise ValueError("lattice needs N >= 1 and d >= 1")

    def log_weight(self, sigma) -> float:
        from .lattice import lattice_l2_energy

        return -self.beta * lattice_l2_energy(sigma)


ModelSpec = Union[L1, L2, WeightedL1, WeightedL2, TwoParam, LatticeL1, LatticeL2]
LATTICE_MODELS = (LatticeL1, LatticeL2)


def is_lattice(model: ModelSpec) -> bool:
    return isinstance(model, LATTICE_MODELS)


def two_param_log_weight(sigma: Permutation, spec: TwoParam) -> float:
    """``-beta1 * H(sigma, Id) + beta2 * C(sigma)``."""
    return -2.0 * spec.beta1 * positive_displacement_sum(sigma) + spec.beta2 * cycle_count(sigma)


def model_size(model: ModelSpec, n: int | None = None) -> int:
    """Number of points the model permutes."""
    if is_lattice(model):
        return model.N ** model.d
    if isinstance(model, (WeightedL1, WeightedL2)):
        if n is not None and n != len(model.weights):
            raise ValueError(f"weights have length {len(model.weights)}, expected n={n}")
        return len(model.weights)
    if n is None:
        raise ValueError("n is required for this model")
    return n

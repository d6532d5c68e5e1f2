"""Reproducible random streams.

Every chain gets its own counter-based Philox generator keyed by
``(seed, replication, stage)``. The key is hashed through ``SeedSequence``,
so streams for different replications are independent and a run's output
does not depend on how replications are scheduled across workers.
"""
from __future__ import annotations

import numpy as np

STAGE_CHAIN = 0
STAGE_START = 1
STAGE_BOUNDS = 2


def make_stream(seed: int, replication: int = 0, stage: int = STAGE_CHAIN) -> np.random.Generator:
    if seed < 0:
        raise ValueError("seed must be non-negative")
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, int(replication), int(stage)])
    return np.random.Generator(np.random.Philox(ss))


def as_generator(rng: np.random.Generator | int | None) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        return np.random.Generator(np.random.Philox())
    return make_stream(int(rng))


def open_unit(rng: np.random.Generator, size: int) -> list[float]:
    """Uniforms on ``(0, 1]`` as a list; zero is excluded so logs stay finite."""
    return (1.0 - rng.random(size)).tolist()

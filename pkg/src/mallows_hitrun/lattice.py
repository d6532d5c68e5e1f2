"""Lattice permutations of ``[N]^d`` and their Gibbs-sweep hit-and-run kernels.

Points are linearized row-major with 1-based coordinates, so point index
``k`` (0-based) has coordinates given by the base-``N`` digits of ``k`` plus
one. A sweep draws all auxiliary bounds once, then for each direction
``j = 1..d`` resamples the ``j``-th image coordinate inside every fiber of
points whose other image coordinates agree.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .perm import Permutation
from .restricted import place_lower, place_upper
from .rng import open_unit


@lru_cache(maxsize=64)
def lattice_points(N: int, d: int) -> tuple[tuple[int, ...], ...]:
    """All points of ``[N]^d`` in row-major order."""
    return tuple(itertools.product(range(1, N + 1), repeat=d))


def point_index(x: Sequence[int], N: int) -> int:
    k = 0
    for c in x:
        k = k * N + (c - 1)
    return k


@dataclass(frozen=True)
class LatticeBijection:
    """A bijection of ``[N]^d``; ``mapping[k]`` is the image of the ``k``-th point."""

    n_side: int
    dim: int
    mapping: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        N, d = self.n_side, self.dim
        if N < 1 or d < 1:
            raise ValueError("need N >= 1 and d >= 1")
        m = tuple(tuple(int(c) for c in y) for y in self.mapping)
        if len(m) != N ** d:
            raise ValueError(f"expected {N ** d} images, got {len(m)}")
        seen = set()
        for y in m:
            if len(y) != d or any(c < 1 or c > N for c in y):
                raise ValueError(f"image {y} is not a point of [{N}]^{d}")
            seen.add(y)
        if len(seen) != len(m):
            raise ValueError("mapping is not a bijection")
        object.__setattr__(self, "mapping", m)

    @classmethod
    def identity(cls, N: int, d: int) -> "LatticeBijection":
        return cls(N, d, lattice_points(N, d))

    @classmethod
    def from_linear(cls, N: int, d: int, images: Sequence[int]) -> "LatticeBijection":
        """Build from 1-based linear image indices."""
        pts = lattice_points(N, d)
        return cls(N, d, tuple(pts[k - 1] for k in images))

    def linear(self) -> Permutation:
        """The bijection as a permutation of the 1-based linear indices."""
        N = self.n_side
        return Permutation._trusted([point_index(y, N) + 1 for y in self.mapping])

    def __call__(self, x: Sequence[int]) -> tuple[int, ...]:
        return self.mapping[point_index(x, self.n_side)]


def lattice_l1_energy(sigma: LatticeBijection) -> int:
    """``H_d(sigma) = sum_x sum_i |sigma(x)_i - x_i|``."""
    pts = lattice_points(sigma.n_side, sigma.dim)
    return sum(abs(a - b) for x, y in zip(pts, sigma.mapping) for a, b in zip(y, x))


def lattice_l2_energy(sigma: LatticeBijection) -> int:
    """Sum of squared Euclidean displacements."""
    pts = lattice_points(sigma.n_side, sigma.dim)
    return sum((a - b) ** 2 for x, y in zip(pts, sigma.mapping) for a, b in zip(y, x))


def _columns(sigma: LatticeBijection) -> list[list[int]]:
    return [list(col) for col in zip(*sigma.mapping)]


def _from_columns(N: int, d: int, cols: list[list[int]]) -> LatticeBijection:
    obj = object.__new__(LatticeBijection)
    object.__setattr__(obj, "n_side", N)
    object.__setattr__(obj, "dim", d)
    object.__setattr__(obj, "mapping", tuple(zip(*cols)))
    return obj


def _unif_grid(rng, P, d, unif):
    if unif is None:
        flat = open_unit(rng, P * d)
        return [flat[k * P:(k + 1) * P] for k in range(d)]
    arr = np.asarray(unif, dtype=float)
    if arr.shape != (P, d) or np.any(arr <= 0) or np.any(arr > 1):
        raise ValueError(f"injected uniforms must have shape ({P}, {d}) with values in (0, 1]")
    return [arr[:, k].tolist() for k in range(d)]


def _fibers(cols: list[list[int]], j: int, N: int) -> list[list[int]]:
    """Group point indices by their image coordinates other than ``j``."""
    d = len(cols)
    P = len(cols[0])
    keys = [0] * P
    for k in range(d):
        if k == j:
            continue
        ck = cols[k]
        for x in range(P):
            keys[x] = keys[x] * N + ck[x] - 1
    groups: dict[int, list[int]] = {}
    for x, key in enumerate(keys):
        groups.setdefault(key, []).append(x)
    return list(groups.values())


def _sweep(cols, bounds, N, rng, place):
    for j, bj in enumerate(bounds):
        cj = cols[j]
        for fiber in _fibers(cols, j, N):
            assert len(fiber) == N, "fiber size must equal N"
            gamma = place([bj[x] for x in fiber], rng.random(N).tolist())
            for x, g in zip(fiber, gamma):
                cj[x] = g
    return cols


def gibbs_sweep_l1(sigma: LatticeBijection, beta: float, rng: np.random.Generator, *,
                   unif=None) -> LatticeBijection:
    """One hit-and-run step (a full sweep over directions) targeting
    ``exp(-beta * H_d)``."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    N, d = sigma.n_side, sigma.dim
    pts = lattice_points(N, d)
    P = len(pts)
    cols = _columns(sigma)
    u = _unif_grid(rng, P, d, unif)
    c = 0.5 / beta
    bounds = []
    for k in range(d):
        ck, uk = cols[k], u[k]
        row = []
        for x in range(P):
            xi = pts[x][k]
            v = ck[x]
            row.append(min((v if v > xi else xi) + int(-math.log(uk[x]) * c), N))
        bounds.append(row)
    return _from_columns(N, d, _sweep(cols, bounds, N, rng, place_upper))


def gibbs_sweep_l2(sigma: LatticeBijection, beta: float, rng: np.random.Generator, *,
                   unif=None) -> LatticeBijection:
    """One sweep targeting ``exp(-beta * sum_x |sigma(x) - x|^2)``."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    N, d = sigma.n_side, sigma.dim
    pts = lattice_points(N, d)
    P = len(pts)
    cols = _columns(sigma)
    u = _unif_grid(rng, P, d, unif)
    c = 0.5 / beta
    bounds = []
    for k in range(d):
        ck, uk = cols[k], u[k]
        bounds.append([max(ck[x] - int(-math.log(uk[x]) * c / pts[x][k]), 1) for x in range(P)])
    return _from_columns(N, d, _sweep(cols, bounds, N, rng, place_lower))


def all_bijections(N: int, d: int):
    """Every bijection of ``[N]^d`` in lexicographic order of the image list."""
    P = N ** d
    if P > 9:
        raise ValueError("enumeration limit exceeded: N^d must be <= 9")
    pts = lattice_points(N, d)
    for perm in itertools.permutations(range(P)):
        yield _from_columns(N, d, [list(col) for col in zip(*(pts[k] for k in perm))])

"""Generated instances for tests, the selftest and benchmarks."""

from typing import Tuple

import numpy as np

from ..geometry.points import PointSet
from .seeding import SeedLike, derive_rng


def random_instance(n: int, d: int, seed: SeedLike = None, scale: float = 100.0) -> Tuple[PointSet, PointSet]:
    """X and Y uniform on [0, scale)^d, rounded to integers."""
    rng = derive_rng(seed)
    X = np.floor(rng.uniform(0.0, scale, size=(n, d)))
    Y = np.floor(rng.uniform(0.0, scale, size=(n, d)))
    return PointSet(X), PointSet(Y)


def clustered_instance(n: int, d: int, seed: SeedLike = None, clusters: int = 4,
                       scale: float = 1000.0, spread: float = 10.0) -> Tuple[PointSet, PointSet]:
    """X and Y drawn around shared cluster centres, so the matching is mostly local."""
    rng = derive_rng(seed)
    centres = rng.uniform(0.0, scale, size=(clusters, d))
    X = centres[rng.integers(0, clusters, size=n)] + rng.normal(0.0, spread, size=(n, d))
    Y = centres[rng.integers(0, clusters, size=n)] + rng.normal(0.0, spread, size=(n, d))
    return PointSet(np.round(X, 3)), PointSet(np.round(Y, 3))


def planted_heavy_instance(n: int, d: int, seed: SeedLike = None, scale: float = 1000.0,
                           radius: float = 5.0, heavy_degree: int = None) -> Tuple[PointSet, PointSet]:
    """
    Background points spread over [0, scale)^d plus one x whose ball of
    the given radius holds heavy_degree points of Y (n // 2 by default).
    """
    rng = derive_rng(seed)
    heavy_degree = n // 2 if heavy_degree is None else heavy_degree
    X = rng.uniform(0.0, scale, size=(n, d))
    Y = rng.uniform(0.0, scale, size=(n, d))
    centre = X[0]
    offsets = rng.uniform(-radius / d, radius / d, size=(heavy_degree, d))
    Y[:heavy_degree] = centre + offsets
    return PointSet(np.round(X, 3)), PointSet(np.round(Y, 3))


def line_instance(n: int, seed: SeedLike = None, max_supply: int = 5, span: float = 100.0):
    """Sorted 1-D positions and an integer supply summing to zero."""
    rng = derive_rng(seed)
    positions = np.sort(rng.uniform(0.0, span, size=n))
    b = rng.integers(-max_supply, max_supply + 1, size=n)
    total = int(b.sum())
    while total != 0:
        step = -1 if total > 0 else 1
        room = np.flatnonzero(np.abs(b + step) <= max_supply)
        b[rng.choice(room)] += step
        total += step
    return positions, b

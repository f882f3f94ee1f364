"""
All-close-pairs retrieval.

Given a closest-pair oracle, find_close_pairs returns the prefix set L_<=t of
cross pairs at distance below (1+eps)^t, for a level t chosen so the prefix
has about n^(1+phi) pairs. Light edges (both endpoints of low degree) show
up as SubsCP answers often enough to be collected directly. Vertices of high
degree show up frequently in a second round of SubsCP calls and have their
neighbourhoods scanned by brute force.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import FrozenSet, Optional, Tuple

import numpy as np

from ..core.exceptions import InputError, RunError
from ..geometry.points import PointSet, pairwise_l1
from ..geometry.rounding import levels_of, prefix_mask
from ..utils.seeding import SeedLike, derive_rng
from .cp_oracle import CpOracle, subs_cp

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ClosePairsResult:
    """
    Prefix level t with its pairs.

    counters and frequent index the vertices of X first, then Y
    (vertex |X| + j is y_j).
    """

    t: int
    pairs: FrozenSet[Tuple[int, int]]
    counters: np.ndarray
    frequent: np.ndarray
    z: float
    light_iterations: int = 0
    count_iterations: int = 0
    light_pairs: int = 0
    heavy_pairs: int = 0

    def pairs_array(self) -> np.ndarray:
        if not self.pairs:
            return np.zeros((0, 2), dtype=np.int64)
        return np.array(sorted(self.pairs), dtype=np.int64)


def _array(P) -> np.ndarray:
    return P.points if isinstance(P, PointSet) else np.asarray(P, dtype=float)


def _log_phi(x: np.ndarray, y: np.ndarray, phi: Optional[float]) -> float:
    if phi is None:
        span = float(np.ptp(np.vstack([x, y]), axis=0).sum()) if x.size and y.size else 1.0
        phi = max(2.0, span)
    return max(1.0, math.log2(phi))


def last_small_prefix(X, Y, z: float, eps: float, seed: SeedLike = None, phi: Optional[float] = None,
                      sample_factor: float = 10.0) -> int:
    """
    Level t such that w.h.p. |L_{t+3}| >= z^2 / log^3 phi and |L_<=t+2| <= 0.1 z^2.

    Samples ceil(sample_factor * (n^2 / z^2) log2 phi) uniform cross pairs and
    returns the smallest level hit, minus 3. The prefix bound fails with
    probability about phi^(-0.14 * sample_factor).
    """
    x, y = _array(X), _array(Y)
    if x.shape[0] == 0 or y.shape[0] == 0:
        raise InputError("last_small_prefix needs nonempty X and Y")
    if z < 1:
        raise InputError(f"z must be >= 1, got {z}")
    if phi is None and isinstance(X, PointSet):
        phi = X.phi
    n = max(x.shape[0], y.shape[0])
    if sample_factor <= 0:
        raise InputError(f"sample_factor must be positive, got {sample_factor}")
    size = int(math.ceil(sample_factor * (n * n / (z * z)) * _log_phi(x, y, phi)))
    if size < 1:
        raise RunError("last_small_prefix drew no pairs")

    rng = derive_rng(seed)
    i = rng.integers(0, x.shape[0], size=size)
    j = rng.integers(0, y.shape[0], size=size)
    dists = np.abs(x[i] - y[j]).sum(axis=1)
    return int(levels_of(dists, eps).min()) - 3


def find_close_pairs(oracle: CpOracle, X, Y, phi_exp: float, eps: float, seed: SeedLike = None,
                     k1: float = 4.0, k2: float = 4.0, frequency_threshold: float = 0.02,
                     phi: Optional[float] = None, t: Optional[int] = None,
                     prefix_sample_factor: float = 10.0) -> ClosePairsResult:
    """
    Recover L_<=t with high probability using SubsCP.

    Args:
        oracle: Closest-pair oracle
        X, Y: Aspect-ratio-reduced point sets
        phi_exp: Sublinearity exponent, z = sqrt(n^(1+phi_exp))
        eps: Level base offset
        seed: Seed
        k1: Light loop runs k1 * z^2 * ln n SubsCP calls
        k2: Counter loop runs k2 * z^2 * ln n SubsCP calls
        frequency_threshold: Vertices with counter >= frequency_threshold * T / z are scanned
        phi: Aspect-ratio bound (inferred from the coordinates when None)
        t: Use this level instead of running last_small_prefix
        prefix_sample_factor: Sample-size multiplier of last_small_prefix

    Returns:
        ClosePairsResult; every returned pair is in L_<=t by a distance check
    """
    x, y = _array(X), _array(Y)
    n_x, n_y = x.shape[0], y.shape[0]
    if n_x == 0 or n_y == 0:
        raise InputError("find_close_pairs needs nonempty X and Y")
    if phi is None and isinstance(X, PointSet):
        phi = X.phi
    n = max(n_x, n_y)
    z = min(float(n), math.sqrt(n ** (1.0 + phi_exp)))
    z = max(z, 1.0)
    log_n = math.log(max(n, 2))

    if t is None:
        t = last_small_prefix(x, y, z, eps, derive_rng(seed, 0), phi, prefix_sample_factor)
    bound_pairs = set()

    def in_prefix(i: int, j: int, level: int) -> bool:
        return bool(prefix_mask(np.abs(x[i] - y[j]).sum(), level, eps))

    light_iterations = int(math.ceil(k1 * z * z * log_n))
    rng = derive_rng(seed, 1)
    for _ in range(light_iterations):
        pair = subs_cp(oracle, x, y, z, eps, rng)
        if pair is not None and in_prefix(pair[0], pair[1], t):
            bound_pairs.add(pair)
    light_pairs = len(bound_pairs)

    count_iterations = int(math.ceil(k2 * z * z * log_n))
    counters = np.zeros(n_x + n_y, dtype=np.int64)
    rng = derive_rng(seed, 2)
    for _ in range(count_iterations):
        pair = subs_cp(oracle, x, y, z, eps, rng)
        if pair is not None and in_prefix(pair[0], pair[1], t + 1):
            counters[pair[0]] += 1
            counters[n_x + pair[1]] += 1

    threshold = frequency_threshold * count_iterations / z
    frequent = np.flatnonzero((counters >= threshold) & (counters > 0))

    for v in frequent:
        if v < n_x:
            row = np.abs(y - x[v]).sum(axis=1)
            for j in np.flatnonzero(prefix_mask(row, t, eps)):
                bound_pairs.add((int(v), int(j)))
        else:
            j = int(v - n_x)
            col = np.abs(x - y[j]).sum(axis=1)
            for i in np.flatnonzero(prefix_mask(col, t, eps)):
                bound_pairs.add((int(i), j))

    logger.debug(f"Close pairs: t={t}, z={z:.3g}, {light_pairs} light, "
                 f"{len(bound_pairs) - light_pairs} from {frequent.size} frequent vertices")
    return ClosePairsResult(
        t=t,
        pairs=frozenset(bound_pairs),
        counters=counters,
        frequent=frequent,
        z=z,
        light_iterations=light_iterations,
        count_iterations=count_iterations,
        light_pairs=light_pairs,
        heavy_pairs=len(bound_pairs) - light_pairs,
    )


def classify_vertices(X, Y, t: int, z: float, eps: float, heavy_fraction: float = 0.5):
    """
    Degrees in L_<=t+1 and heavy flags (degree > heavy_fraction * z).

    Returns:
        (degrees, heavy) over X then Y
    """
    x, y = _array(X), _array(Y)
    adjacency = prefix_mask(pairwise_l1(x, y), t + 1, eps)
    degrees = np.concatenate([adjacency.sum(axis=1), adjacency.sum(axis=0)]).astype(np.int64)
    return degrees, degrees > heavy_fraction * z


def frequency_estimate(oracle: CpOracle, X, Y, t: int, z: float, eps: float,
                       trials: int, seed: SeedLike = None) -> np.ndarray:
    """
    Fraction of SubsCP calls returning an L_<=t+1 pair incident to each vertex.

    Returns:
        Frequencies over X then Y
    """
    x, y = _array(X), _array(Y)
    n_x = x.shape[0]
    hits = np.zeros(n_x + y.shape[0], dtype=np.int64)
    rng = derive_rng(seed)
    for _ in range(trials):
        pair = subs_cp(oracle, x, y, z, eps, rng)
        if pair is not None and prefix_mask(np.abs(x[pair[0]] - y[pair[1]]).sum(), t + 1, eps):
            hits[pair[0]] += 1
            hits[n_x + pair[1]] += 1
    return hits / max(trials, 1)

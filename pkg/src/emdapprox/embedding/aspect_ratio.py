"""
Aspect-ratio reduction.

An arbitrary instance is split into sub-instances whose coordinates are
integers in [1, phi] with phi polynomial in n, d and 1/eps:

1. rough_estimate: a Gaussian projection to the line gives eta with
   EMD <= eta <= O~(n^2 sqrt(d)) EMD.
2. grid_partition: a randomly shifted grid of side 100*eta separates the
   instance into independent parts.
3. pad_min_distance: small random extra coordinates keep distinct points
   apart.
4. rescale and round each part onto the integer grid.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from ..core.exceptions import InputError, RetryExhaustedError
from ..geometry.points import PointSet, SupplyDemand, pairwise_l1
from ..oracles.exact import one_d_emd
from ..utils.seeding import SeedLike, derive_rng, derive_seed

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReducedPart:
    """One reduced sub-instance.

    ``scale`` maps distances back: EMD of the input part ~= EMD of points / scale.
    ``source_indices`` are the rows of the input this part was built from.
    """

    points: PointSet
    supply: SupplyDemand
    scale: float
    source_indices: np.ndarray

    @property
    def phi(self) -> float:
        return float(self.points.phi)


@dataclass(frozen=True)
class ReducedInstance:
    parts: List[ReducedPart] = field(default_factory=list)
    phi: float = 1.0

    def __len__(self) -> int:
        return len(self.parts)


def _points(X) -> np.ndarray:
    return X.points if isinstance(X, PointSet) else np.asarray(X, dtype=float)


def _supply(b) -> SupplyDemand:
    return b if isinstance(b, SupplyDemand) else SupplyDemand(np.asarray(b))


def rough_estimate(X, b, seed: SeedLike = None) -> float:
    """
    O~(n^2 sqrt(d))-approximation of EMD_X(b) from one Gaussian projection.

    The projection is scaled by n^2 sqrt(d), sorted and solved exactly on the line.
    """
    pts = _points(X)
    supply = _supply(b)
    n, d = pts.shape
    if len(supply) != n:
        raise InputError(f"Supply length {len(supply)} does not match {n} points")
    if supply.is_zero or n < 2:
        return 0.0
    rng = derive_rng(seed)
    g = rng.standard_normal(d)
    scale = n * n * math.sqrt(d)
    proj = scale * (pts @ g)
    order = np.argsort(proj, kind="stable")
    return one_d_emd(proj[order], SupplyDemand(supply.b[order]))


def grid_partition(X, b, eta: float, seed: SeedLike = None,
                   side_factor: float = 100.0, max_retries: int = 20) -> List[Tuple[np.ndarray, SupplyDemand]]:
    """
    Split X along a uniformly shifted grid of side side_factor*eta.

    Shifts that leave a part with nonzero supply sum are resampled.

    Returns:
        List of (row indices into X, supply of the part), cells in lexicographic order

    Raises:
        RetryExhaustedError: no balanced shift within max_retries draws
    """
    pts = _points(X)
    supply = _supply(b)
    n, d = pts.shape
    if len(supply) != n:
        raise InputError(f"Supply length {len(supply)} does not match {n} points")
    if n == 0:
        return []
    if eta <= 0:
        return [(np.arange(n), supply)]

    side = side_factor * eta
    for attempt in range(max_retries):
        rng = derive_rng(seed, attempt)
        shift = rng.uniform(0.0, side, size=d)
        cells = np.floor((pts + shift) / side).astype(np.int64)
        _, inverse = np.unique(cells, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        sums = np.bincount(inverse, weights=supply.b.astype(float))
        if np.all(sums == 0):
            parts = []
            for cell in range(int(inverse.max()) + 1):
                idx = np.flatnonzero(inverse == cell)
                parts.append((idx, SupplyDemand(supply.b[idx])))
            if attempt:
                logger.debug(f"Grid partition balanced after {attempt + 1} shifts")
            return parts
        logger.debug(f"Grid shift {attempt + 1} left an unbalanced part, resampling")

    raise RetryExhaustedError(f"No balanced grid shift in {max_retries} attempts (side {side:.6g})")


def pad_dimension(n: int) -> int:
    """Number of padding coordinates, ceil(4 ln n) + 8."""
    return int(math.ceil(4 * math.log(max(n, 1)))) + 8


def pad_min_distance(X, eps_pad: float, seed: SeedLike = None, d_prime: Optional[int] = None) -> PointSet:
    """Append d' coordinates drawn uniformly from [0, eps_pad]."""
    if eps_pad <= 0:
        raise InputError(f"eps_pad must be positive, got {eps_pad}")
    pts = _points(X)
    n = pts.shape[0]
    d_prime = pad_dimension(n) if d_prime is None else d_prime
    rng = derive_rng(seed)
    pad = rng.uniform(0.0, eps_pad, size=(n, d_prime))
    return PointSet(np.hstack([pts, pad]))


def _next_power_of_two(value: float) -> float:
    return float(2 ** max(1, int(math.ceil(math.log2(max(value, 2.0))))))


def _integerize(pts: np.ndarray, eps: float) -> Tuple[np.ndarray, float, float]:
    """Scale so the minimum distance becomes 2d/eps, shift to start at 1, round.

    Rounding moves each distance by at most d, which keeps distinct points
    at distance >= d and the relative error at most eps/2.
    """
    d_total = pts.shape[1]
    dists = pairwise_l1(pts, pts)
    np.fill_diagonal(dists, np.inf)
    min_dist = float(dists.min())
    scale = (2.0 * d_total / eps) / min_dist
    shifted = (pts - pts.min(axis=0)) * scale
    grid = np.rint(shifted) + 1.0
    int_dists = pairwise_l1(grid, grid)
    phi = _next_power_of_two(max(float(grid.max()), float(int_dists.max())))
    return grid, scale, phi


def reduce_aspect_ratio(X, b, eps: float, seed: SeedLike = None,
                        side_factor: float = 100.0, max_retries: int = 20) -> ReducedInstance:
    """
    Reduce (X, b) to parts with integer coordinates in [1, phi].

    Points with zero supply are dropped first; a metric never needs them for
    transshipment.

    Returns:
        ReducedInstance with one part per nonzero grid cell
    """
    if not (0 < eps <= 1):
        raise InputError(f"eps must be in (0, 1], got {eps}")
    pts = _points(X)
    supply = _supply(b)
    if len(supply) != pts.shape[0]:
        raise InputError(f"Supply length {len(supply)} does not match {pts.shape[0]} points")
    if supply.is_zero:
        return ReducedInstance(parts=[], phi=1.0)

    support = np.flatnonzero(supply.b)
    pts = pts[support]
    sup = SupplyDemand(supply.b[support])
    d = pts.shape[1]

    eta = rough_estimate(pts, sup, derive_seed(seed, 0))
    cells = grid_partition(pts, sup, eta, derive_seed(seed, 1), side_factor, max_retries)

    parts: List[ReducedPart] = []
    for k, (idx, part_supply) in enumerate(cells):
        if part_supply.is_zero:
            continue
        part_pts = pts[idx]
        n_part = part_pts.shape[0]
        eta_part = rough_estimate(part_pts, part_supply, derive_seed(seed, 2, k))
        if eta_part <= 0:
            # every unit of supply cancels in place
            logger.debug(f"Part {k} has zero rough estimate, skipping")
            continue
        spread = n_part ** 2 * math.sqrt(d)
        eps_pad = eps * eta_part / (spread * n_part * max(1.0, math.log(n_part)))
        padded = pad_min_distance(part_pts, eps_pad, derive_seed(seed, 3, k))
        grid, scale, phi = _integerize(padded.points, eps)
        parts.append(ReducedPart(
            points=PointSet(grid, phi),
            supply=part_supply,
            scale=scale,
            source_indices=support[idx],
        ))
        logger.debug(f"Part {k}: {n_part} points, phi={phi:.6g}, scale={scale:.6g}")

    phi = max((p.phi for p in parts), default=1.0)
    return ReducedInstance(parts=parts, phi=phi)

"""
Point sets and supplies in (R^d, l1).
"""

from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from ..core.exceptions import DomainError, InputError


def _as_matrix(points, d: Optional[int] = None) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.size == 0:
        return np.empty((0, d if d is not None else (arr.shape[1] if arr.ndim == 2 else 1)))
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise InputError(f"Points must be a 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError("Points contain NaN or infinite coordinates")
    return arr


@dataclass(frozen=True)
class PointSet:
    """Ordered points of R^d with an optional aspect-ratio bound phi."""

    points: np.ndarray
    phi: Optional[float] = None

    def __post_init__(self):
        arr = np.array(_as_matrix(self.points), dtype=float, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "points", arr)
        if self.phi is not None and self.phi < 1:
            raise InputError(f"phi must be >= 1, got {self.phi}")

    @property
    def n(self) -> int:
        return int(self.points.shape[0])

    @property
    def d(self) -> int:
        return int(self.points.shape[1])

    def __len__(self) -> int:
        return self.n

    def subset(self, indices) -> "PointSet":
        return PointSet(self.points[np.asarray(indices, dtype=np.int64)], self.phi)

    def with_phi(self, phi: float) -> "PointSet":
        return PointSet(self.points, phi)

    def check_cross_range(self, other: "PointSet") -> None:
        """Raise DomainError unless every cross distance lies in [1, phi]."""
        if self.n == 0 or other.n == 0:
            return
        dists = pairwise_l1(self.points, other.points)
        if dists.min() < 1:
            raise DomainError(f"Cross distance {dists.min():.6g} below 1")
        if self.phi is not None and dists.max() > self.phi:
            raise DomainError(f"Cross distance {dists.max():.6g} above phi={self.phi:.6g}")


@dataclass(frozen=True)
class SupplyDemand:
    """Integer supply b over a point set; positive entries supply, negative demand."""

    b: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def __post_init__(self):
        raw = np.asarray(self.b)
        if raw.ndim != 1:
            raise InputError(f"Supply must be one-dimensional, got shape {raw.shape}")
        if raw.size and not np.all(np.equal(np.round(raw), raw)):
            raise InputError("Supply must be integral")
        arr = raw.astype(np.int64)
        if int(arr.sum()) != 0:
            raise InputError(f"Supply must sum to zero, got {int(arr.sum())}")
        arr.setflags(write=False)
        object.__setattr__(self, "b", arr)

    def __len__(self) -> int:
        return int(self.b.size)

    @property
    def total(self) -> int:
        """Total positive supply."""
        return int(self.b[self.b > 0].sum())

    @property
    def is_zero(self) -> bool:
        return not np.any(self.b)

    def sources(self) -> np.ndarray:
        return np.flatnonzero(self.b > 0)

    def sinks(self) -> np.ndarray:
        return np.flatnonzero(self.b < 0)


def l1_distance(x, y) -> float:
    """l1 distance between two points of equal dimension."""
    xa = np.asarray(x, dtype=float).ravel()
    ya = np.asarray(y, dtype=float).ravel()
    if xa.shape != ya.shape:
        raise InputError(f"Dimension mismatch: {xa.shape[0]} vs {ya.shape[0]}")
    return float(np.abs(xa - ya).sum())


def pairwise_l1(A, B) -> np.ndarray:
    """Matrix of l1 distances between the rows of A and the rows of B."""
    a = _as_matrix(A)
    b = _as_matrix(B, a.shape[1])
    if a.shape[0] == 0 or b.shape[0] == 0:
        return np.zeros((a.shape[0], b.shape[0]))
    if a.shape[1] != b.shape[1]:
        raise InputError(f"Dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    return cdist(a, b, metric="cityblock")


def dedup_and_cancel(X: PointSet, Y: PointSet) -> Tuple[PointSet, PointSet]:
    """
    Remove coincident points shared by X and Y as a multiset.

    Each x is paired with the lowest-index unused y at the same coordinates;
    paired points are dropped from both sides, the rest keep their order.
    """
    if X.n and Y.n and X.d != Y.d:
        raise InputError(f"Dimension mismatch: {X.d} vs {Y.d}")

    pending = defaultdict(deque)
    for j, row in enumerate(Y.points):
        pending[(row + 0.0).tobytes()].append(j)

    keep_x = np.ones(X.n, dtype=bool)
    keep_y = np.ones(Y.n, dtype=bool)
    for i, row in enumerate(X.points):
        queue = pending.get((row + 0.0).tobytes())
        if queue:
            keep_y[queue.popleft()] = False
            keep_x[i] = False

    d = X.d if X.n else Y.d
    x_pts = X.points[keep_x] if X.n else np.empty((0, d))
    y_pts = Y.points[keep_y] if Y.n else np.empty((0, d))
    return PointSet(x_pts.reshape(-1, d), X.phi), PointSet(y_pts.reshape(-1, d), Y.phi)

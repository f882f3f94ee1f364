"""
Distance levels and rounded costs.

A pair at l1 distance r >= 1 has psi = floor(log_{1+eps} r) and level
psi + 1, so level-l pairs satisfy (1+eps)^(l-1) <= r < (1+eps)^l. Values
within a relative 2^-40 of a power of (1+eps) snap to that power.

The rounded cost of a pair is C = (1+eps)^(psi - 2*[pair in S]) for a fixed
random set S of pairs with psi >= 2.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional

import numpy as np

from ..core.exceptions import DomainError, InputError
from .points import PointSet, l1_distance, pairwise_l1

logger = logging.getLogger(__name__)

SNAP = 2.0 ** -40


def _check_eps(eps: float) -> None:
    if not (0 < eps <= 1):
        raise InputError(f"eps must be in (0, 1], got {eps}")


def level_power(eps: float, exponent) -> np.ndarray:
    """(1+eps)^exponent, elementwise."""
    return np.power(1.0 + eps, np.asarray(exponent, dtype=float))


def floor_log_levels(values, eps: float) -> np.ndarray:
    """
    Integer h with (1+eps)^h <= v < (1+eps)^(h+1) for each positive v.

    Args:
        values: Positive reals
        eps: Base offset, the base is 1+eps

    Returns:
        int64 array shaped like values
    """
    v = np.asarray(values, dtype=float)
    if v.size and np.any(v <= 0):
        raise InputError("floor_log_levels needs positive values")
    base = math.log1p(eps)
    k = np.log(v) / base
    nearest = np.rint(k)
    snapped = np.abs(v - level_power(eps, nearest)) <= SNAP * v
    h = np.floor(k)
    # float drift in log() can put h one step off
    h = np.where(level_power(eps, h + 1) <= v, h + 1, h)
    h = np.where(level_power(eps, h) > v, h - 1, h)
    h = np.where(snapped, nearest, h)
    return h.astype(np.int64)


def psi_levels(dists, eps: float) -> np.ndarray:
    """psi for an array of distances, each at least 1."""
    _check_eps(eps)
    d = np.asarray(dists, dtype=float)
    d = np.where((d < 1) & (1 - d <= SNAP), 1.0, d)
    if d.size and d.min() < 1:
        raise DomainError(f"Distance {d.min():.6g} below 1; reduce the aspect ratio first")
    return floor_log_levels(d, eps)


def psi_level(x, y, eps: float) -> int:
    """psi of the pair (x, y)."""
    return int(psi_levels(np.array([l1_distance(x, y)]), eps)[0])


def level_of(x, y, eps: float) -> int:
    """Level of the pair (x, y)."""
    return psi_level(x, y, eps) + 1


def levels_of(dists, eps: float) -> np.ndarray:
    return psi_levels(dists, eps) + 1


def prefix_mask(dists, t: int, eps: float) -> np.ndarray:
    """Membership of distances in the prefix L_<=t, i.e. r < (1+eps)^t."""
    d = np.asarray(dists, dtype=float)
    return d < float(level_power(eps, t)) * (1.0 - SNAP)


def prefix_member(x, y, t: int, eps: float) -> bool:
    """True iff ||x - y||_1 < (1+eps)^t."""
    _check_eps(eps)
    return bool(prefix_mask(np.array([l1_distance(x, y)]), t, eps)[0])


@dataclass(frozen=True)
class LevelSets:
    """Cross pairs of X x Y grouped by level."""

    eps: float
    levels: np.ndarray

    @property
    def min_level(self) -> int:
        return int(self.levels.min()) if self.levels.size else 0

    @property
    def max_level(self) -> int:
        return int(self.levels.max()) if self.levels.size else 0

    def members(self, level: int) -> np.ndarray:
        return np.argwhere(self.levels == level)

    def prefix(self, t: int) -> np.ndarray:
        """Pairs of level at most t, as rows (i, j) in lexicographic order."""
        return np.argwhere(self.levels <= t)

    def prefix_size(self, t: int) -> int:
        return int(np.count_nonzero(self.levels <= t))

    def counts(self) -> Dict[int, int]:
        values, counts = np.unique(self.levels, return_counts=True)
        return {int(v): int(c) for v, c in zip(values, counts)}


def level_sets(X: PointSet, Y: PointSet, eps: float) -> LevelSets:
    """Levels of every cross pair; O(|X| |Y|) memory."""
    dists = pairwise_l1(X.points, Y.points)
    return LevelSets(eps=eps, levels=levels_of(dists, eps))


def _codes_from(S, n_y: int) -> np.ndarray:
    if S is None:
        return np.zeros(0, dtype=np.int64)
    codes = getattr(S, "codes", S)
    arr = np.asarray(list(codes) if isinstance(codes, (set, frozenset)) else codes)
    if arr.size == 0:
        return np.zeros(0, dtype=np.int64)
    if arr.ndim == 2:
        arr = arr[:, 0].astype(np.int64) * n_y + arr[:, 1].astype(np.int64)
    return np.unique(arr.astype(np.int64))


@dataclass(frozen=True)
class RoundingState:
    """Fixed rounding of costs for one instance; read-only after construction."""

    X: np.ndarray
    Y: np.ndarray
    eps: float
    s_codes: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    explicit_exponents: Optional[np.ndarray] = None

    @property
    def n_x(self) -> int:
        return int(self.X.shape[0])

    @property
    def n_y(self) -> int:
        return int(self.Y.shape[0])

    @property
    def s_size(self) -> int:
        return int(self.s_codes.size)

    def distances(self, i, j) -> np.ndarray:
        i = np.asarray(i, dtype=np.int64)
        j = np.asarray(j, dtype=np.int64)
        return np.abs(self.X[i] - self.Y[j]).sum(axis=-1)

    def in_s(self, i, j) -> np.ndarray:
        codes = np.asarray(i, dtype=np.int64) * self.n_y + np.asarray(j, dtype=np.int64)
        if self.s_codes.size == 0:
            return np.zeros(codes.shape, dtype=bool)
        pos = np.searchsorted(self.s_codes, codes)
        pos = np.minimum(pos, self.s_codes.size - 1)
        return self.s_codes[pos] == codes

    def psi(self, i, j) -> np.ndarray:
        return psi_levels(self.distances(i, j), self.eps)

    def exponents(self, i, j) -> np.ndarray:
        """psi - 2*[pair in S], so C = (1+eps)^exponent."""
        if self.explicit_exponents is not None:
            return self.explicit_exponents[np.asarray(i, dtype=np.int64), np.asarray(j, dtype=np.int64)]
        return self.psi(i, j) - 2 * self.in_s(i, j).astype(np.int64)

    def costs(self, i, j) -> np.ndarray:
        return level_power(self.eps, self.exponents(i, j))

    def cost(self, i: int, j: int) -> float:
        return float(self.costs(np.array([i]), np.array([j]))[0])

    def exponent_matrix(self) -> np.ndarray:
        if self.explicit_exponents is not None:
            return self.explicit_exponents
        ii, jj = np.meshgrid(np.arange(self.n_x), np.arange(self.n_y), indexing="ij")
        return self.exponents(ii, jj)

    def cost_matrix(self) -> np.ndarray:
        return level_power(self.eps, self.exponent_matrix())

    def psi_matrix(self) -> np.ndarray:
        return psi_levels(pairwise_l1(self.X, self.Y), self.eps)


def draw_rounding_state(X, Y, eps: float, S=None, materialize_limit: int = 1 << 20) -> RoundingState:
    """
    Build the rounding for X x Y with down-rounded pair set S.

    Pairs of S with psi < 2 are dropped, so every cost stays at least
    (1+eps)^0 = 1 and the (1+4eps) sandwich holds.

    Args:
        X, Y: PointSets or arrays
        eps: Accuracy in (0, 1]
        S: Pair codes i*|Y|+j, an (k, 2) array of pairs, or an object with ``codes``
        materialize_limit: Cache the exponent matrix when |X||Y| is at most this

    Returns:
        RoundingState
    """
    _check_eps(eps)
    x_pts = X.points if isinstance(X, PointSet) else np.asarray(X, dtype=float)
    y_pts = Y.points if isinstance(Y, PointSet) else np.asarray(Y, dtype=float)
    n_y = y_pts.shape[0]
    codes = _codes_from(S, n_y)

    if codes.size:
        ci, cj = np.divmod(codes, n_y)
        dists = np.abs(x_pts[ci] - y_pts[cj]).sum(axis=1)
        keep = psi_levels(dists, eps) >= 2
        dropped = int(codes.size - keep.sum())
        if dropped:
            logger.debug(f"Dropped {dropped} pairs with psi < 2 from the rounding set")
        codes = codes[keep]

    state = RoundingState(X=x_pts, Y=y_pts, eps=eps, s_codes=codes)
    if x_pts.shape[0] * n_y <= materialize_limit:
        exps = state.exponent_matrix()
        exps.setflags(write=False)
        state = RoundingState(X=x_pts, Y=y_pts, eps=eps, s_codes=codes, explicit_exponents=exps)
    return state


def rounded_cost(i: int, j: int, rounding: RoundingState) -> float:
    """C_ij under the given rounding."""
    return rounding.cost(i, j)

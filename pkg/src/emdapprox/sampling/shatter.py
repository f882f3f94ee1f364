"""
The random pair set S behind the consistent rounding, and the shattering
check: S tau-shatters a partition of the pairs when every cell A_i with
|A_i| >= tau holds a 0.9 to 1.1 share of S proportional to its size.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ..core.exceptions import InputError
from ..utils.seeding import SeedLike, derive_rng


@dataclass(frozen=True)
class ShatterSet:
    """Sorted pair codes i * n_y + j."""

    n_x: int
    n_y: int
    codes: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def __len__(self) -> int:
        return int(self.codes.size)

    @classmethod
    def empty(cls, n_x: int, n_y: int) -> "ShatterSet":
        return cls(n_x, n_y, np.zeros(0, dtype=np.int64))

    def contains(self, i, j) -> np.ndarray:
        codes = np.asarray(i, dtype=np.int64) * self.n_y + np.asarray(j, dtype=np.int64)
        if self.codes.size == 0:
            return np.zeros(codes.shape, dtype=bool)
        pos = np.minimum(np.searchsorted(self.codes, codes), self.codes.size - 1)
        return self.codes[pos] == codes

    def pairs(self) -> np.ndarray:
        i, j = np.divmod(self.codes, self.n_y)
        return np.column_stack([i, j])


def shatter_size(n: int, phi_exp: float) -> int:
    """n^(2 - phi/8), capped at n^2."""
    return int(min(n * n, round(n ** (2.0 - phi_exp / 8.0))))


def shatter_threshold(n: int, phi_exp: float) -> int:
    """tau = n^(1 + phi/2)."""
    return int(math.ceil(n ** (1.0 + phi_exp / 2.0)))


def draw_rounding_set(n: int, phi_exp: float, seed: SeedLike = None,
                      n_y: Optional[int] = None, size: Optional[int] = None) -> ShatterSet:
    """
    Uniform pairs without replacement from [n] x [n_y].

    Args:
        n: Rows (and columns when n_y is None)
        phi_exp: Sets the size n^(2 - phi/8)
        seed: Seed
        n_y: Columns
        size: Explicit size override

    Returns:
        ShatterSet
    """
    n_y = n if n_y is None else n_y
    universe = n * n_y
    if size is None:
        size = shatter_size(max(n, n_y), phi_exp)
    size = int(size)
    if size < 0:
        raise InputError(f"Rounding set size must be non-negative, got {size}")
    size = min(size, universe)
    if size == 0:
        return ShatterSet.empty(n, n_y)
    if size == universe:
        return ShatterSet(n, n_y, np.arange(universe, dtype=np.int64))
    rng = derive_rng(seed)
    codes = np.sort(rng.choice(universe, size=size, replace=False)).astype(np.int64)
    return ShatterSet(n, n_y, codes)


def shatter_check(S: ShatterSet, cell_sizes: Sequence[int],
                  membership: Callable[[np.ndarray], np.ndarray], tau: int) -> bool:
    """
    True iff S tau-shatters the partition.

    Args:
        S: Pair set
        cell_sizes: |A_i| for every cell
        membership: Maps an array of pair codes to their cell indices
        tau: Only cells of at least tau pairs are checked
    """
    sizes = np.asarray(cell_sizes, dtype=float)
    total = sizes.sum()
    large = sizes >= tau
    if not np.any(large):
        return True
    if len(S) == 0 or total == 0:
        return False
    counts = np.bincount(np.asarray(membership(S.codes), dtype=np.int64), minlength=sizes.size)
    share = counts[large] / len(S)
    expected = sizes[large] / total
    return bool(np.all((share >= 0.9 * expected) & (share <= 1.1 * expected)))

"""
Dual state and its rounding.

Duals are integers in a fixed unit (the solver uses phi / 2^h, the finest
tree potential). The difference alpha_i - beta_j is rounded down to a power
of (1+chi): D_ij <= |alpha_i - beta_j| <= (1+chi) D_ij, with D_ij = 0 when
the duals agree. P_ij is the sign of the difference with sign(0) = +1.
"""

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from ..core.exceptions import InputError
from ..geometry.rounding import floor_log_levels, level_power

# Level codes are sign * (h + LEVEL_OFFSET); 0 encodes a zero difference.
LEVEL_OFFSET = 1 << 50


@dataclass(frozen=True)
class DualState:
    alpha: np.ndarray
    beta: np.ndarray
    chi: float
    unit: float = 1.0

    def __post_init__(self):
        if self.chi <= 0:
            raise InputError(f"chi must be positive, got {self.chi}")
        for name in ("alpha", "beta"):
            arr = np.asarray(getattr(self, name))
            if arr.size and not np.all(np.equal(np.round(arr), arr)):
                raise InputError(f"{name} must hold integers in dual units")
            arr = arr.astype(np.int64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def zeros(cls, n_x: int, n_y: int, chi: float, unit: float = 1.0) -> "DualState":
        return cls(np.zeros(n_x, dtype=np.int64), np.zeros(n_y, dtype=np.int64), chi, unit)

    @property
    def n_x(self) -> int:
        return int(self.alpha.size)

    @property
    def n_y(self) -> int:
        return int(self.beta.size)

    def differences(self, i, j) -> np.ndarray:
        """alpha_i - beta_j in real units."""
        i = np.asarray(i, dtype=np.int64)
        j = np.asarray(j, dtype=np.int64)
        return (self.alpha[i] - self.beta[j]).astype(float) * self.unit

    def difference_matrix(self) -> np.ndarray:
        return (self.alpha[:, None] - self.beta[None, :]).astype(float) * self.unit


def rounded_level(diff, chi: float) -> np.ndarray:
    """
    Signed level code of each difference: 0 for a zero difference, otherwise
    sign * (h + LEVEL_OFFSET) with (1+chi)^h <= |diff| < (1+chi)^(h+1).
    """
    d = np.asarray(diff, dtype=float)
    codes = np.zeros(d.shape, dtype=np.int64)
    nonzero = d != 0
    if np.any(nonzero):
        h = floor_log_levels(np.abs(d[nonzero]), chi)
        sign = np.where(d[nonzero] > 0, 1, -1)
        codes[nonzero] = sign * (h + LEVEL_OFFSET)
    return codes


def decode_level(codes, chi: float) -> Tuple[np.ndarray, np.ndarray]:
    """(D, P) for level codes."""
    c = np.asarray(codes, dtype=np.int64)
    P = np.where(c < 0, -1, 1)
    D = np.zeros(c.shape, dtype=float)
    nonzero = c != 0
    if np.any(nonzero):
        D[nonzero] = level_power(chi, np.abs(c[nonzero]) - LEVEL_OFFSET)
    return D, P


@dataclass(frozen=True)
class RoundedDuals:
    """Lazy D and P accessors over a dual state."""

    state: DualState

    @property
    def chi(self) -> float:
        return self.state.chi

    def codes(self, i, j) -> np.ndarray:
        return rounded_level(self.state.differences(i, j), self.chi)

    def values(self, i, j) -> Tuple[np.ndarray, np.ndarray]:
        """(D_ij, P_ij) for index arrays."""
        return decode_level(self.codes(i, j), self.chi)

    def D(self, i: int, j: int) -> float:
        return float(self.values(np.array([i]), np.array([j]))[0][0])

    def P(self, i: int, j: int) -> int:
        return int(self.values(np.array([i]), np.array([j]))[1][0])

    def code_matrix(self) -> np.ndarray:
        return rounded_level(self.state.difference_matrix(), self.chi)

    def matrices(self) -> Tuple[np.ndarray, np.ndarray]:
        """Dense (D, P); desk scale only."""
        return decode_level(self.code_matrix(), self.chi)


def round_duals(state: DualState) -> RoundedDuals:
    return RoundedDuals(state)

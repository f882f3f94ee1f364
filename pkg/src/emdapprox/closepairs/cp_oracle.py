"""
Closest-Pair Oracles

An oracle answers (1+eps)-approximate bichromatic closest-pair queries with
a declared failure probability. Oracles are registered by name so the CLI
and config can select them.

Usage:
    from emdapprox.closepairs import CpOracleRegistry

    oracle = CpOracleRegistry.get_oracle('brute')
    i, j = closest_pair(oracle, A, B, eps=0.1, seed=7)

Adding New Oracles:
    @CpOracleRegistry.register('your_oracle')
    class YourOracle(CpOracle):
        failure_probability = 1 / 3

        def query(self, A, B, eps, rng):
            ...
"""

import logging
import math
from abc import ABC, abstractmethod
from typing import Dict, List, Optional, Tuple, Type

import numpy as np
from scipy.spatial.distance import cdist

from ..core.exceptions import InputError
from ..geometry.points import PointSet
from ..oracles.exact import brute_closest_pair
from ..utils.seeding import SeedLike, derive_rng

logger = logging.getLogger(__name__)


class CpOracle(ABC):
    """Interface of a (1+eps)-approximate closest-pair oracle."""

    name: str = "abstract"
    failure_probability: float = 1.0 / 3.0

    @abstractmethod
    def query(self, A: np.ndarray, B: np.ndarray, eps: float, rng: np.random.Generator) -> Tuple[int, int]:
        """Return indices (a, b) into A and B; A and B are nonempty."""


class CpOracleRegistry:
    """Registry for closest-pair oracles."""

    _oracles: Dict[str, Type[CpOracle]] = {}

    @classmethod
    def register(cls, name: str):
        """Decorator to register an oracle class."""
        def decorator(oracle_cls: Type[CpOracle]):
            if name in cls._oracles:
                logger.warning(f"Overwriting existing closest-pair oracle: {name}")
            oracle_cls.name = name
            cls._oracles[name] = oracle_cls
            logger.debug(f"Registered closest-pair oracle: {name}")
            return oracle_cls
        return decorator

    @classmethod
    def get_oracle(cls, name: str) -> CpOracle:
        """Instantiate an oracle by name."""
        if name not in cls._oracles:
            available = cls.list_oracles()
            raise InputError(f"Unknown closest-pair oracle: '{name}'. Available: {available}")
        return cls._oracles[name]()

    @classmethod
    def list_oracles(cls) -> List[str]:
        return sorted(cls._oracles.keys())


@CpOracleRegistry.register('brute')
class BruteCpOracle(CpOracle):
    """Exhaustive scan; exact and deterministic."""

    failure_probability = 0.0

    def query(self, A, B, eps, rng):
        i, j, _ = brute_closest_pair(A, B)
        return i, j


@CpOracleRegistry.register('grid')
class GridCpOracle(CpOracle):
    """
    Shifted-grid heuristic.

    A sparse sample of A against all of B gives a candidate pair at distance
    r. Points are then bucketed into cells of side 2r under a few random
    shifts and compared only within cells; any pair closer than r collides
    in a given shift with probability at least 1/2.
    """

    failure_probability = 1.0 / 3.0
    num_shifts = 3
    brute_limit = 256

    def query(self, A, B, eps, rng):
        n_a, n_b = A.shape[0], B.shape[0]
        if n_a * n_b <= self.brute_limit:
            i, j, _ = brute_closest_pair(A, B)
            return i, j

        k = min(n_a, max(1, int(math.ceil(math.sqrt(n_a)))))
        probe = np.sort(rng.choice(n_a, size=k, replace=False))
        dists = cdist(A[probe], B, metric="cityblock")
        r_idx, j = np.unravel_index(int(np.argmin(dists)), dists.shape)
        best = (float(dists[r_idx, j]), int(probe[r_idx]), int(j))
        if best[0] == 0.0:
            return best[1], best[2]

        side = 2.0 * best[0]
        d = A.shape[1]
        for _ in range(self.num_shifts):
            shift = rng.uniform(0.0, side, size=d)
            cells_a = np.floor((A + shift) / side).astype(np.int64)
            cells_b = np.floor((B + shift) / side).astype(np.int64)
            keys, inverse = np.unique(np.vstack([cells_a, cells_b]), axis=0, return_inverse=True)
            inverse = inverse.reshape(-1)
            cell_a, cell_b = inverse[:n_a], inverse[n_a:]
            shared = np.intersect1d(cell_a, cell_b)
            for cell in shared:
                ia = np.flatnonzero(cell_a == cell)
                ib = np.flatnonzero(cell_b == cell)
                local = cdist(A[ia], B[ib], metric="cityblock")
                a_pos, b_pos = np.unravel_index(int(np.argmin(local)), local.shape)
                candidate = (float(local[a_pos, b_pos]), int(ia[a_pos]), int(ib[b_pos]))
                if candidate < best:
                    best = candidate
        return best[1], best[2]


def _as_array(P) -> np.ndarray:
    return P.points if isinstance(P, PointSet) else np.asarray(P, dtype=float)


def closest_pair(oracle: CpOracle, A, B, eps: float, seed: SeedLike = None) -> Tuple[int, int]:
    """One oracle query on nonempty A and B."""
    a, b = _as_array(A), _as_array(B)
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise InputError("Closest pair needs two nonempty sets")
    return oracle.query(a, b, eps, derive_rng(seed))


def boosted_cp(oracle: CpOracle, A, B, eps: float, reps: int, seed: SeedLike = None) -> Tuple[int, int]:
    """
    Closest of reps independent queries; failure probability at most
    failure_probability ** reps.
    """
    if reps < 1:
        raise InputError(f"reps must be >= 1, got {reps}")
    a, b = _as_array(A), _as_array(B)
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise InputError("Closest pair needs two nonempty sets")
    if oracle.failure_probability == 0:
        reps = 1

    rng = derive_rng(seed)
    best: Optional[Tuple[float, int, int]] = None
    for rep in range(reps):
        i, j = oracle.query(a, b, eps, derive_rng(rng, rep) if reps > 1 else rng)
        candidate = (float(np.abs(a[i] - b[j]).sum()), int(i), int(j))
        if best is None or candidate < best:
            best = candidate
    return best[1], best[2]


def boost_repetitions(oracle: CpOracle, n: int) -> int:
    """Repetitions that push the failure probability below n^-3."""
    p = oracle.failure_probability
    if p <= 0:
        return 1
    return max(1, int(math.ceil(3.0 * math.log(max(n, 2)) / math.log(1.0 / p))))


def subs_cp(oracle: CpOracle, X, Y, z: float, eps: float, seed: SeedLike = None) -> Optional[Tuple[int, int]]:
    """
    Closest pair of independent 1/z subsamples of X and Y.

    Subsample sizes are binomial, elements distinct. The smaller side is
    padded with far-away dummies so the oracle sees equal sizes; a dummy in
    the answer means no real pair.

    Returns:
        (i, j) indices into X and Y, or None when a subsample is empty
    """
    if z < 1:
        raise InputError(f"z must be >= 1, got {z}")
    x, y = _as_array(X), _as_array(Y)
    rng = derive_rng(seed)
    n_x, n_y = x.shape[0], y.shape[0]

    k_x = int(rng.binomial(n_x, 1.0 / z))
    k_y = int(rng.binomial(n_y, 1.0 / z))
    if k_x == 0 or k_y == 0:
        return None
    sub_x = np.sort(rng.choice(n_x, size=k_x, replace=False))
    sub_y = np.sort(rng.choice(n_y, size=k_y, replace=False))
    A, B = x[sub_x], y[sub_y]

    if k_x != k_y:
        sentinel_value = 10.0 * max(float(np.abs(x).max()), float(np.abs(y).max()), 1.0) + 10.0
        d = x.shape[1]
        if k_x < k_y:
            A = np.vstack([A, np.full((k_y - k_x, d), sentinel_value)])
        else:
            B = np.vstack([B, np.full((k_x - k_y, d), sentinel_value)])

    reps = boost_repetitions(oracle, max(n_x, n_y))
    i, j = boosted_cp(oracle, A, B, eps, reps, rng)
    if i >= k_x or j >= k_y:
        return None
    return int(sub_x[i]), int(sub_y[j])

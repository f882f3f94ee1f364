"""
Sampling from lambda for arbitrary duals.

The pair grid is split into D-constant squares and an explicit leftover set
E. E's weights are summed exactly; each square's volume is summed exactly
under the exact estimator when small enough, and estimated otherwise. A
draw picks a part in proportion to its volume, then samples inside it.
"""

import logging
import math
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.special import logsumexp, softmax

from ..closepairs.close_pairs import ClosePairsResult, find_close_pairs
from ..closepairs.cp_oracle import CpOracle
from ..geometry.rounding import RoundingState, levels_of
from ..utils.seeding import SeedLike, derive_rng
from .constant_sampler import ConstantSampler, SamplerStats
from .duals import DualState, round_duals
from .estimator import estimate_log_weight_sum
from .partition import Rectangle, partition_rectangles
from .shatter import ShatterSet

logger = logging.getLogger(__name__)

SAMPLER_DEFAULTS = {
    'attempt_budget_factor': 64.0,
    'volume_constant': 100.0,
    'weight_estimator': 'exact',
    'exact_sum_limit': 1_000_000,
    'median_of': 9,
    'explicit_rect_side': 2,
}

CLOSE_PAIRS_DEFAULTS = {
    'k1': 4.0,
    'k2': 4.0,
    'frequency_threshold': 0.02,
    'prefix_sample_factor': 10.0,
}


class _VolumeAdapter:
    """Reveals log(w_ij,+ + w_ij,-) for pairs drawn from one square's lambda marginal."""

    def __init__(self, sampler: ConstantSampler):
        self.sampler = sampler
        self.support_size = sampler.universe

    def draw_log_weights(self, count: int, rng: np.random.Generator) -> np.ndarray:
        i, j, _ = self.sampler.sample(count, rng)
        lw = self.sampler.scale / self.sampler.rounding.costs(i, j)
        return np.logaddexp(lw, -lw)


class ArbitrarySampler:
    """
    Sampler for lambda(eta, C, D, P) under a fixed dual state.

    Args:
        rounding: Rounding state of the instance
        S: Rounding set, used to build each square's explicit set
        state: Dual state
        eta: MWU learning rate
        oracle: Closest-pair oracle for the squares' prefixes
        phi_exp: Sublinearity exponent
        seed: Seed
        sampler_config: Overrides for SAMPLER_DEFAULTS
        close_pairs_config: Overrides for CLOSE_PAIRS_DEFAULTS
        phi: Aspect-ratio bound, for the volume precision
    """

    def __init__(self, rounding: RoundingState, S: ShatterSet, state: DualState, eta: float,
                 oracle: CpOracle, phi_exp: float, seed: SeedLike = None,
                 sampler_config: Optional[Dict] = None, close_pairs_config: Optional[Dict] = None,
                 phi: Optional[float] = None):
        self.rounding = rounding
        self.S = S
        self.state = state
        self.eta = float(eta)
        self.oracle = oracle
        self.phi_exp = phi_exp
        self.seed = seed
        self.config = {**SAMPLER_DEFAULTS, **(sampler_config or {})}
        self.cp_config = {**CLOSE_PAIRS_DEFAULTS, **(close_pairs_config or {})}
        self.stats = SamplerStats()

        n = max(rounding.n_x, rounding.n_y)
        log_phi = max(1.0, math.log2(phi)) if phi else 1.0
        eps = rounding.eps
        self.volume_precision = eps * eps / (self.config['volume_constant'] * max(1.0, math.log(n)) ** 2 * log_phi ** 2)

        self.partition = partition_rectangles(state)
        rounded = round_duals(state)

        E = self.partition.explicit
        if E.size:
            D, P = rounded.values(E[:, 0], E[:, 1])
            exponent = self.eta * P * D / rounding.costs(E[:, 0], E[:, 1])
            self._e_log_weights = np.concatenate([exponent, -exponent])
            log_e = float(logsumexp(self._e_log_weights))
            self._e_probs = np.exp(self._e_log_weights - log_e)
        else:
            self._e_log_weights = np.zeros(0)
            self._e_probs = np.zeros(0)
            log_e = -np.inf

        self._samplers: Dict[int, ConstantSampler] = {}
        volumes = [log_e] + [self._rect_log_volume(k, rect) for k, rect in enumerate(self.partition.rects)]
        self.log_volumes = np.array(volumes)
        self._part_probs = softmax(self.log_volumes)
        logger.debug(f"Arbitrary sampler: |E|={len(E)}, {len(self.partition.rects)} squares")

    def _rect_log_volume(self, k: int, rect: Rectangle) -> float:
        if self.config['weight_estimator'] == 'exact' and rect.size <= self.config['exact_sum_limit']:
            lw = self.eta * abs(rect.kappa) / self.rounding.costs(
                np.repeat(rect.rows, rect.cols.size), np.tile(rect.cols, rect.rows.size))
            return float(logsumexp(np.logaddexp(lw, -lw)))
        adapter = _VolumeAdapter(self._rect_sampler(k))
        return estimate_log_weight_sum(adapter, self.volume_precision, derive_rng(self.seed, 3, k),
                                       self.config['median_of'])

    def _rect_prefix(self, k: int, rect: Rectangle) -> ClosePairsResult:
        X = self.rounding.X[rect.rows]
        Y = self.rounding.Y[rect.cols]
        if max(rect.rows.size, rect.cols.size) <= self.config['explicit_rect_side']:
            a, b = np.meshgrid(np.arange(rect.rows.size), np.arange(rect.cols.size), indexing="ij")
            dists = np.abs(X[a.ravel()] - Y[b.ravel()]).sum(axis=1)
            t = int(levels_of(dists, self.rounding.eps).max())
            pairs = frozenset(zip(a.ravel().tolist(), b.ravel().tolist()))
            counters = np.zeros(rect.rows.size + rect.cols.size, dtype=np.int64)
            return ClosePairsResult(t=t, pairs=pairs, counters=counters,
                                    frequent=np.zeros(0, dtype=np.int64), z=1.0)
        return find_close_pairs(
            self.oracle, X, Y, self.phi_exp, self.rounding.eps, derive_rng(self.seed, 1, k),
            k1=self.cp_config['k1'], k2=self.cp_config['k2'],
            frequency_threshold=self.cp_config['frequency_threshold'],
            prefix_sample_factor=self.cp_config['prefix_sample_factor'],
        )

    def _local_rounding_pairs(self, rect: Rectangle) -> np.ndarray:
        if len(self.S) == 0:
            return np.zeros((0, 2), dtype=np.int64)
        row_pos = np.full(self.rounding.n_x, -1, dtype=np.int64)
        col_pos = np.full(self.rounding.n_y, -1, dtype=np.int64)
        row_pos[rect.rows] = np.arange(rect.rows.size)
        col_pos[rect.cols] = np.arange(rect.cols.size)
        si, sj = np.divmod(self.S.codes, self.S.n_y)
        a, b = row_pos[si], col_pos[sj]
        inside = (a >= 0) & (b >= 0)
        return np.column_stack([a[inside], b[inside]])

    @property
    def prefixes(self) -> Dict[int, ClosePairsResult]:
        """Close-pair prefixes of the squares sampled so far."""
        return {k: sampler.prefix for k, sampler in self._samplers.items()}

    def _rect_sampler(self, k: int) -> ConstantSampler:
        if k not in self._samplers:
            rect = self.partition.rects[k]
            self._samplers[k] = ConstantSampler(
                rect.rows, rect.cols, self.rounding, rect.kappa, self.eta,
                prefix=self._rect_prefix(k, rect),
                s_local=self._local_rounding_pairs(rect),
                phi_exp=self.phi_exp,
                estimator=self.config['weight_estimator'],
                eps_est=self.volume_precision,
                attempt_budget_factor=self.config['attempt_budget_factor'],
                exact_sum_limit=self.config['exact_sum_limit'],
                median_of=self.config['median_of'],
                seed=derive_rng(self.seed, 2, k),
            )
        return self._samplers[k]

    def sample(self, count: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """count i.i.d. draws (i, j, sigma)."""
        per_part = rng.multinomial(count, self._part_probs)
        out_i, out_j, out_s = [], [], []

        if per_part[0]:
            E = self.partition.explicit
            idx = rng.choice(self._e_log_weights.size, size=int(per_part[0]), p=self._e_probs)
            pair = idx % len(E)
            out_i.append(E[pair, 0])
            out_j.append(E[pair, 1])
            out_s.append(np.where(idx < len(E), 1, -1))

        for k in np.flatnonzero(per_part[1:]):
            sampler = self._rect_sampler(int(k))
            i, j, s = sampler.sample(int(per_part[k + 1]), rng)
            out_i.append(i)
            out_j.append(j)
            out_s.append(s)

        for sampler in self._samplers.values():
            self.stats.merge(sampler.stats)
            sampler.stats = SamplerStats()

        if not out_i:
            empty = np.zeros(0, dtype=np.int64)
            return empty, empty, empty
        i = np.concatenate(out_i)
        j = np.concatenate(out_j)
        s = np.concatenate(out_s)
        order = rng.permutation(i.size)
        return i[order], j[order], s[order]


def arbitrary_sampler(rounding: RoundingState, S: ShatterSet, state: DualState, eta: float, count: int,
                      oracle: CpOracle, phi_exp: float = 0.5, seed: SeedLike = None, **kwargs):
    """
    count draws (i, j, sigma) from lambda(eta, C, D, P) for the given duals.

    Returns:
        (i, j, sigma) arrays
    """
    sampler = ArbitrarySampler(rounding, S, state, eta, oracle, phi_exp, derive_rng(seed, 0), **kwargs)
    return sampler.sample(count, derive_rng(seed, 1))

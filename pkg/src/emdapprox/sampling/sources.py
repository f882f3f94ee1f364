"""
Sources of lambda for one MWU round.

Both sources reduce lambda to what Certify needs: the signed flow
divergence g_x[i] = sum_j (lambda_ij+ - lambda_ij-) / C_ij and g_y[j] with
the same sum over i. The explicit source computes it exactly from the full
table; the sampled source averages sigma / C over draws.
"""

import logging
from abc import ABC, abstractmethod
from typing import Dict, Optional, Tuple

import numpy as np

from ..closepairs.cp_oracle import CpOracle
from ..geometry.rounding import RoundingState
from ..oracles.exact import explicit_lambda
from ..utils.seeding import SeedLike
from .arbitrary_sampler import ArbitrarySampler
from .duals import DualState, round_duals
from .shatter import ShatterSet

logger = logging.getLogger(__name__)


class LambdaSource(ABC):
    """Flow divergence of lambda(eta, C, D, P) for a given dual state."""

    name: str = ""

    def __init__(self, rounding: RoundingState, eta: float):
        self.rounding = rounding
        self.eta = float(eta)

    @abstractmethod
    def flow_divergence(self, state: DualState, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray, Dict]:
        """
        Returns:
            (g_x, g_y, diagnostics)
        """


class ExplicitLambdaSource(LambdaSource):
    """Exact expectations from the 2 n^2 table; quadratic per round."""

    name = "explicit"

    def __init__(self, rounding: RoundingState, eta: float):
        super().__init__(rounding, eta)
        self._costs = rounding.cost_matrix()

    def table(self, state: DualState) -> np.ndarray:
        D, P = round_duals(state).matrices()
        return explicit_lambda(self.eta, self._costs, D, P)

    def flow_divergence(self, state, rng):
        lam = self.table(state)
        m = (lam[..., 0] - lam[..., 1]) / self._costs
        return m.sum(axis=1), m.sum(axis=0), {"samples": 0}


class SampledLambdaSource(LambdaSource):
    """
    Empirical flow divergence from `samples` draws of the arbitrary sampler.

    Args:
        rounding: Rounding state
        eta: MWU learning rate
        S: Rounding set
        oracle: Closest-pair oracle for the fixed-D samplers
        samples: Draws per round
        phi_exp: Sublinearity exponent
        phi: Aspect-ratio bound
        sampler_config: Sampler section overrides
        close_pairs_config: Close-pairs section overrides
    """

    name = "sampler"

    def __init__(self, rounding: RoundingState, eta: float, S: ShatterSet, oracle: CpOracle, samples: int,
                 phi_exp: float = 0.5, phi: Optional[float] = None,
                 sampler_config: Optional[Dict] = None, close_pairs_config: Optional[Dict] = None):
        super().__init__(rounding, eta)
        self.S = S
        self.oracle = oracle
        self.samples = int(samples)
        self.phi_exp = phi_exp
        self.phi = phi
        self.sampler_config = sampler_config
        self.close_pairs_config = close_pairs_config

    def draw(self, state: DualState, count: int, rng: np.random.Generator):
        sampler = ArbitrarySampler(
            self.rounding, self.S, state, self.eta, self.oracle, self.phi_exp, seed=rng,
            sampler_config=self.sampler_config, close_pairs_config=self.close_pairs_config, phi=self.phi,
        )
        i, j, sigma = sampler.sample(count, rng)
        return i, j, sigma, sampler

    def flow_divergence(self, state, rng):
        i, j, sigma, sampler = self.draw(state, self.samples, rng)
        contrib = sigma / self.rounding.costs(i, j)
        g_x = np.bincount(i, weights=contrib, minlength=self.rounding.n_x) / self.samples
        g_y = np.bincount(j, weights=contrib, minlength=self.rounding.n_y) / self.samples
        diagnostics = {
            "samples": self.samples,
            "explicit_pairs": int(len(sampler.partition.explicit)),
            "rectangles": len(sampler.partition.rects),
            **sampler.stats.as_dict(),
        }
        return g_x, g_y, diagnostics

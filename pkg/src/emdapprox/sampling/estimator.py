"""
Normalization-constant estimation from proportional samples.

If y is drawn with probability w(y)/W over a support of m items, then
E[1/w(y)] = m/W, so W ~= m / mean(1/w) over k = ceil(c sqrt(m)/eps) draws.
A median over several independent estimates sharpens the success
probability. Weights are handled in log space throughout.
"""

import math
from typing import Protocol

import numpy as np
from scipy.special import logsumexp

from ..core.exceptions import InputError
from ..utils.seeding import SeedLike, derive_rng


class ProportionalSampler(Protocol):
    """Draws items proportionally to their weight and reveals the log-weight."""

    support_size: int

    def draw_log_weights(self, count: int, rng: np.random.Generator) -> np.ndarray:
        ...


class TableSampler:
    """ProportionalSampler over an explicit table of log-weights."""

    def __init__(self, log_weights):
        self.log_weights = np.asarray(log_weights, dtype=float).ravel()
        if self.log_weights.size == 0:
            raise InputError("TableSampler needs at least one item")
        self.support_size = int(self.log_weights.size)
        self.log_total = float(logsumexp(self.log_weights))
        self._probs = np.exp(self.log_weights - self.log_total)

    def draw_log_weights(self, count: int, rng: np.random.Generator) -> np.ndarray:
        idx = rng.choice(self.support_size, size=count, p=self._probs)
        return self.log_weights[idx]


def estimate_log_weight_sum(sampler: ProportionalSampler, eps_est: float, seed: SeedLike = None,
                            median_of: int = 9, constant: float = 4.0) -> float:
    """log of the estimated total weight."""
    if eps_est <= 0:
        raise InputError(f"eps_est must be positive, got {eps_est}")
    m = sampler.support_size
    if m < 1:
        raise InputError("Empty support")
    k = max(1, int(math.ceil(constant * math.sqrt(m) / eps_est)))
    rng = derive_rng(seed)
    estimates = []
    for _ in range(max(1, median_of)):
        log_w = np.asarray(sampler.draw_log_weights(k, rng), dtype=float)
        if not np.any(np.isfinite(log_w)):
            raise InputError("Degenerate sampler: every observed weight is zero")
        # log(m / mean(exp(-log_w)))
        log_mean_inverse = float(logsumexp(-log_w)) - math.log(log_w.size)
        estimates.append(math.log(m) - log_mean_inverse)
    return float(np.median(estimates))


def estimate_weight_sum(sampler: ProportionalSampler, eps_est: float, seed: SeedLike = None,
                        median_of: int = 9, constant: float = 4.0) -> float:
    """
    Estimate W = sum of weights to within (1 +- eps_est).

    Args:
        sampler: Proportional sampler revealing weights
        eps_est: Relative precision
        seed: Seed
        median_of: Independent estimates combined by their median
        constant: Sample-count constant c in c sqrt(m) / eps

    Returns:
        Estimated W
    """
    return math.exp(estimate_log_weight_sum(sampler, eps_est, seed, median_of, constant))

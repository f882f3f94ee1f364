"""
Sampling from lambda on a rectangle where the rounded dual difference is a
constant kappa (signed).

Pair weights are w_ij = exp(eta |kappa| / C_ij). Pairs in the prefix L_<=t
and the rounding-set pairs of levels t+1 and t+2 form the explicit set T
and are sampled from their exact weights. Every other pair has
C_ij >= (1+eps)^t, so w_max = exp(eta |kappa| (1+eps)^-t) is an envelope for
rejection sampling on the complement. The complement's total weight W_c
sets the mixture; a secondary acceptance step with r = |complement| w_max / W_c
makes the two branches exactly proportional. The sign is drawn last: sigma
is kept with probability w_ij,sigma / (2 w_ij).
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.special import expit, logsumexp

from ..closepairs.close_pairs import ClosePairsResult
from ..core.exceptions import InputError, SamplerStallError
from ..geometry.rounding import RoundingState, levels_of
from ..utils.seeding import SeedLike, derive_rng
from .estimator import estimate_log_weight_sum

logger = logging.getLogger(__name__)


@dataclass
class SamplerStats:
    attempts: int = 0
    accepted: int = 0
    rejected_pair: int = 0
    rejected_sign: int = 0
    redraws: int = 0

    def merge(self, other: "SamplerStats") -> "SamplerStats":
        for key, value in asdict(other).items():
            setattr(self, key, getattr(self, key) + value)
        return self

    def as_dict(self) -> dict:
        return asdict(self)


class _ComplementSampler:
    """Proportional sampler over the complement, used by the sum estimator."""

    def __init__(self, owner: "ConstantSampler"):
        self.owner = owner
        self.support_size = owner.complement_size

    def draw_log_weights(self, count: int, rng: np.random.Generator) -> np.ndarray:
        out = []
        while sum(x.size for x in out) < count:
            codes = self.owner._uniform_complement(2 * count, rng)
            lw = self.owner._log_weights(codes)
            keep = rng.random(codes.size) < np.exp(np.minimum(0.0, lw - self.owner.log_w_max))
            out.append(lw[keep])
        return np.concatenate(out)[:count]


class ConstantSampler:
    """
    Exact sampler for lambda restricted to one D-constant rectangle.

    Args:
        rows, cols: Global indices of the rectangle
        rounding: Rounding state of the full instance
        kappa: Signed rounded difference P * D on the rectangle
        eta: MWU learning rate
        prefix: Close pairs of the rectangle, in local indices
        s_local: Rounding-set pairs inside the rectangle, local (k, 2)
        phi_exp: Sublinearity exponent, sets the attempt budget
        estimator: 'exact' or 'sampling' for the complement weight
        eps_est: Precision of the sampling estimator
        attempt_budget_factor: Attempts per sample are capped at factor * m^(1 - phi/4)
        exact_sum_limit: Complements up to this size are enumerated
        median_of: Median amplification of the sampling estimator
        seed: Seed for the estimator
    """

    def __init__(self, rows, cols, rounding: RoundingState, kappa: float, eta: float,
                 prefix: ClosePairsResult, s_local: Optional[np.ndarray] = None,
                 phi_exp: float = 0.5, estimator: str = "exact", eps_est: float = 0.05,
                 attempt_budget_factor: float = 64.0, exact_sum_limit: int = 1_000_000,
                 median_of: int = 9, seed: SeedLike = None):
        self.rows = np.asarray(rows, dtype=np.int64)
        self.cols = np.asarray(cols, dtype=np.int64)
        self.m_r, self.m_c = self.rows.size, self.cols.size
        if self.m_r == 0 or self.m_c == 0:
            raise InputError("Rectangle must be nonempty")
        self.rounding = rounding
        self.kappa = float(kappa)
        self.eta = float(eta)
        self.sign = 1 if self.kappa >= 0 else -1
        self.scale = self.eta * abs(self.kappa)
        self.prefix = prefix
        self.t = int(prefix.t)
        self.universe = self.m_r * self.m_c

        explicit = [np.asarray(prefix.pairs_array(), dtype=np.int64).reshape(-1, 2)]
        if s_local is not None and len(s_local):
            s_local = np.asarray(s_local, dtype=np.int64).reshape(-1, 2)
            dists = rounding.distances(self.rows[s_local[:, 0]], self.cols[s_local[:, 1]])
            lev = levels_of(dists, rounding.eps)
            explicit.append(s_local[(lev == self.t + 1) | (lev == self.t + 2)])
        pairs = np.vstack(explicit)
        self.t_codes = np.unique(pairs[:, 0] * self.m_c + pairs[:, 1])
        self.t_log_weights = self._log_weights(self.t_codes)
        self.log_w_t = float(logsumexp(self.t_log_weights)) if self.t_codes.size else -np.inf
        self._t_probs = (np.exp(self.t_log_weights - self.log_w_t) if self.t_codes.size else np.zeros(0))

        self.complement_size = self.universe - int(self.t_codes.size)
        self.log_w_max = self.scale * (1.0 + rounding.eps) ** (-self.t)
        self._complement_codes = None
        if self.complement_size and self.universe <= exact_sum_limit:
            self._complement_codes = np.setdiff1d(np.arange(self.universe, dtype=np.int64), self.t_codes)

        if self.complement_size == 0:
            self.log_w_c = -np.inf
        elif estimator == "exact" and self._complement_codes is not None:
            self.log_w_c = float(logsumexp(self._log_weights(self._complement_codes)))
        else:
            self.log_w_c = estimate_log_weight_sum(_ComplementSampler(self), eps_est, derive_rng(seed, 0), median_of)

        if self.complement_size:
            self.log_r = math.log(self.complement_size) + self.log_w_max - self.log_w_c
        else:
            self.log_r = 0.0
        self.accept_t = math.exp(-max(0.0, self.log_r))
        self.accept_c = math.exp(min(0.0, self.log_r))
        if self.complement_size == 0:
            self.p_t = 1.0
        elif not self.t_codes.size:
            self.p_t = 0.0
        else:
            self.p_t = float(expit(self.log_w_t - self.log_w_c))

        m = max(self.m_r, self.m_c)
        self.per_sample_budget = max(1, int(math.ceil(attempt_budget_factor * m ** (1.0 - phi_exp / 4.0))))
        # envelope too loose for the budget: draw the enumerated complement directly
        self.direct_complement = (
            self._complement_codes is not None
            and self.complement_size > 0
            and 2.0 * max(1.0, math.exp(min(self.log_r, 700.0))) > self.per_sample_budget / 2.0
        )
        if self.direct_complement:
            logger.debug(f"Rectangle {self.m_r}x{self.m_c}: envelope ratio e^{self.log_r:.3g} exceeds budget, "
                         f"sampling the enumerated complement")
            c_lw = self._log_weights(self._complement_codes)
            self.log_w_c = float(logsumexp(c_lw))
            self._c_probs = np.exp(c_lw - self.log_w_c)
            log_total = np.logaddexp(self.log_w_t, self.log_w_c)
            self.p_t = float(np.exp(self.log_w_t - log_total)) if self.t_codes.size else 0.0
            self.accept_t = self.accept_c = 1.0
        self.stats = SamplerStats()

    def _log_weights(self, codes: np.ndarray) -> np.ndarray:
        """log w_ij = eta |kappa| / C_ij for local codes."""
        a, b = np.divmod(codes, self.m_c)
        return self.scale / self.rounding.costs(self.rows[a], self.cols[b])

    def _uniform_complement(self, count: int, rng: np.random.Generator) -> np.ndarray:
        if self._complement_codes is not None:
            return self._complement_codes[rng.integers(0, self._complement_codes.size, size=count)]
        codes = rng.integers(0, self.universe, size=count)
        while True:
            hit = np.isin(codes, self.t_codes)
            if not np.any(hit):
                return codes
            self.stats.redraws += int(hit.sum())
            codes[hit] = rng.integers(0, self.universe, size=int(hit.sum()))

    def sample(self, count: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """count i.i.d. draws (i, j, sigma) in global indices."""
        out_codes, out_sigma = [], []
        have = 0
        budget = self.per_sample_budget * max(count, 1) + 64
        attempts = 0
        while have < count:
            need = count - have
            batch = max(32, 2 * need)
            if attempts + batch > budget:
                raise SamplerStallError(
                    f"Rectangle {self.m_r}x{self.m_c}: {have}/{count} samples after {attempts} attempts "
                    f"(budget {budget})",
                    attempts=attempts, budget=budget,
                )
            attempts += batch

            from_t = rng.random(batch) < self.p_t
            n_t = int(from_t.sum())
            n_c = batch - n_t
            codes_parts, lw_parts = [], []
            if n_t:
                idx = rng.choice(self.t_codes.size, size=n_t, p=self._t_probs)
                keep = rng.random(n_t) < self.accept_t
                codes_parts.append(self.t_codes[idx][keep])
                lw_parts.append(self.t_log_weights[idx][keep])
            if n_c:
                if self.direct_complement:
                    codes = self._complement_codes[rng.choice(self._complement_codes.size, size=n_c, p=self._c_probs)]
                    lw = self._log_weights(codes)
                    keep = np.ones(n_c, dtype=bool)
                else:
                    codes = self._uniform_complement(n_c, rng)
                    lw = self._log_weights(codes)
                    keep = rng.random(n_c) < np.exp(np.minimum(0.0, lw - self.log_w_max)) * self.accept_c
                codes_parts.append(codes[keep])
                lw_parts.append(lw[keep])

            codes = np.concatenate(codes_parts) if codes_parts else np.zeros(0, dtype=np.int64)
            lw = np.concatenate(lw_parts) if lw_parts else np.zeros(0)
            self.stats.rejected_pair += batch - codes.size

            u = rng.random(codes.size)
            sigma = np.where(u < 0.5, self.sign, np.where(u < 0.5 + 0.5 * np.exp(-2.0 * lw), -self.sign, 0))
            ok = sigma != 0
            self.stats.rejected_sign += int((~ok).sum())
            codes, sigma = codes[ok][:need], sigma[ok][:need]
            out_codes.append(codes)
            out_sigma.append(sigma)
            have += codes.size

        self.stats.attempts += attempts
        self.stats.accepted += count
        codes = np.concatenate(out_codes) if out_codes else np.zeros(0, dtype=np.int64)
        sigma = np.concatenate(out_sigma) if out_sigma else np.zeros(0, dtype=np.int64)
        a, b = np.divmod(codes, self.m_c)
        return self.rows[a], self.cols[b], sigma.astype(np.int64)

    @property
    def log_volume(self) -> float:
        """log of sum over pairs and signs of w_ij,sigma."""
        if self._complement_codes is None and self.complement_size:
            raise InputError("Exact volume needs an enumerable rectangle")
        lw = self._log_weights(np.arange(self.universe, dtype=np.int64))
        return float(logsumexp(np.logaddexp(lw, -lw)))


def constant_sampler(rows, cols, rounding: RoundingState, kappa: float, eta: float,
                     prefix: ClosePairsResult, count: int, seed: SeedLike = None,
                     s_local: Optional[np.ndarray] = None, **kwargs):
    """
    count draws (i, j, sigma) from lambda on a D-constant rectangle.

    Returns:
        (i, j, sigma) arrays in global indices
    """
    sampler = ConstantSampler(rows, cols, rounding, kappa, eta, prefix, s_local, seed=derive_rng(seed, 0), **kwargs)
    return sampler.sample(count, derive_rng(seed, 1))

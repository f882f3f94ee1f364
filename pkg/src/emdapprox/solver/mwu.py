"""
The multiplicative-weights driver for one threshold t.

Weights are never stored: lambda at round r is lambda(eta, C, D^r, P^r)
for the accumulated integer duals, and each round only needs its flow
divergence. The run ends with Fail at the first failed Certify, or returns
the averaged duals, which are checked against Gamma_t when the cost matrix
is affordable. In practical mode the averaged duals are first moved to
their best c-transform against the rounded costs.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional

import numpy as np

from ..core.exceptions import SamplerStallError
from ..core.logging_utils import ProgressLogger
from ..embedding.perturb import PerturbedInstance
from ..geometry.points import pairwise_l1
from ..geometry.rounding import RoundingState
from ..sampling.duals import DualState
from ..sampling.sources import LambdaSource
from ..utils.seeding import SeedLike, derive_rng
from .certify import Certificate, certify, dual_unit, level_residuals, residual_fail_test
from .params import MwuParams

logger = logging.getLogger(__name__)


class MwuStatus(str, Enum):
    CERTIFIED = "certified"
    FAILED = "failed"
    EXHAUSTED = "exhausted"


@dataclass
class MwuOptions:
    """Extra exits used in practical mode."""

    level_rule: str = "first"
    averaged_fail: bool = False
    early_certify: bool = False
    tighten: bool = False

    @classmethod
    def for_mode(cls, mode: str, practical: Optional[Dict] = None) -> "MwuOptions":
        if mode != "practical":
            return cls()
        practical = practical or {}
        return cls(
            level_rule=practical.get('level_rule', 'max'),
            averaged_fail=bool(practical.get('averaged_fail', True)),
            early_certify=bool(practical.get('early_certify', True)),
            tighten=bool(practical.get('tighten_duals', True)),
        )


@dataclass(frozen=True)
class CertificateCheck:
    valid: bool
    margin: float
    lower_bound: float


@dataclass
class MwuResult:
    status: MwuStatus
    t: float
    rounds: int
    certificate: Optional[Certificate] = None
    check: Optional[CertificateCheck] = None
    reason: str = ""
    diagnostics: List[Dict] = field(default_factory=list)

    @property
    def certified(self) -> bool:
        return self.status == MwuStatus.CERTIFIED


def rescaled_lower_bound(cert: Certificate, rounding: RoundingState) -> float:
    """
    Objective of the certificate rescaled to a feasible EMD dual:
    alpha' = alpha / max_ij (alpha_i - beta_j) / ||x_i - y_j||.
    """
    objective = float(cert.alpha.sum() - cert.beta.sum())
    if objective <= 0:
        return 0.0
    ratio = float(np.max((cert.alpha[:, None] - cert.beta[None, :]) / pairwise_l1(rounding.X, rounding.Y)))
    if ratio <= 0:
        return 0.0
    return objective / ratio


def verify_certificate(cert: Certificate, rounding: RoundingState) -> CertificateCheck:
    """
    Check (1/t)(sum alpha - sum beta) - max |alpha_i - beta_j| / C_ij > 0
    over all 2 n^2 constraints.
    """
    costs = rounding.cost_matrix()
    worst = float(np.max(np.abs(cert.alpha[:, None] - cert.beta[None, :]) / costs))
    margin = cert.value - worst
    return CertificateCheck(valid=margin > 0, margin=margin, lower_bound=rescaled_lower_bound(cert, rounding))


def _transform_from_alpha(alpha: np.ndarray, costs: np.ndarray):
    beta = np.max(alpha[:, None] - costs, axis=0)
    return np.min(beta[None, :] + costs, axis=1), beta


def _transform_from_beta(beta: np.ndarray, costs: np.ndarray):
    alpha = np.min(beta[None, :] + costs, axis=1)
    return alpha, np.max(alpha[:, None] - costs, axis=0)


def _best_transform(alpha: np.ndarray, beta: np.ndarray, costs: np.ndarray):
    """
    Best of the c-transform passes for duals with |alpha_i - beta_j| <= C_ij.

    Every candidate stays feasible. The passes started from zero give the
    nearest-neighbour bounds.
    """
    candidates = [
        (alpha, beta),
        _transform_from_alpha(alpha, costs),
        _transform_from_beta(beta, costs),
        _transform_from_alpha(np.zeros_like(alpha), costs),
        _transform_from_beta(np.zeros_like(beta), costs),
    ]
    return max(candidates, key=lambda pair: float(pair[0].sum() - pair[1].sum()))


def tighten_certificate(cert: Certificate, costs: np.ndarray) -> Certificate:
    """
    Improve a certificate against the rounded costs.

    The duals are scaled so that max |alpha_i - beta_j| / C_ij = 1, moved
    to their best c-transform, and scaled back. The margin against the same
    costs never shrinks.
    """
    worst = float(np.max(np.abs(cert.alpha[:, None] - cert.beta[None, :]) / costs))
    if worst <= 0:
        worst = 1.0
    alpha, beta = _best_transform(cert.alpha / worst, cert.beta / worst, costs)
    return Certificate(alpha * worst, beta * worst, cert.t, cert.level)


def _averaged(state: DualState, rounds: int, t: float) -> Certificate:
    return Certificate(state.alpha * state.unit / rounds, state.beta * state.unit / rounds, t)


def _closing_certificate(state: DualState, rounds: int, t: float, costs: Optional[np.ndarray]) -> Certificate:
    cert = _averaged(state, rounds, t)
    if costs is not None:
        cert = tighten_certificate(cert, costs)
    return cert


def mwu_run(instance: PerturbedInstance, rounding: RoundingState, t: float, params: MwuParams,
            source: LambdaSource, seed: SeedLike = None, options: Optional[MwuOptions] = None,
            progress: Optional[ProgressLogger] = None) -> MwuResult:
    """
    Run the rounds at threshold t.

    Args:
        instance: Perturbed instance; its tree points are X then Y
        rounding: Rounding of the perturbed X x Y
        t: Threshold
        params: MWU schedule
        source: Lambda source (explicit table or sampler)
        seed: Seed
        options: Practical-mode exits
        progress: Optional progress logger

    Returns:
        MwuResult
    """
    options = options or MwuOptions()
    n_x, n_y = rounding.n_x, rounding.n_y
    unit = dual_unit(instance.tree)
    state = DualState.zeros(n_x, n_y, params.chi, unit)
    verifiable = rounding.explicit_exponents is not None
    tighten_costs = rounding.cost_matrix() if (verifiable and options.tighten) else None
    sum_gx = np.zeros(n_x)
    sum_gy = np.zeros(n_y)
    diagnostics: List[Dict] = []

    for r in range(1, params.R + 1):
        try:
            g_x, g_y, info = source.flow_divergence(state, derive_rng(seed, r))
        except SamplerStallError as e:
            logger.error(f"Sampler stalled at round {r}, t={t:.6g}: {e}")
            raise

        outcome = certify(g_x, g_y, t, params, instance.tree, options.level_rule)
        record = {
            "round": r,
            "t": t,
            "level": outcome.level,
            "gap": outcome.gap,
            "residual": float(outcome.residuals.sum()),
            **info,
        }
        diagnostics.append(record)
        if progress:
            progress.log_round(r, params.R, outcome.level, outcome.gap)

        if outcome.failed:
            return MwuResult(MwuStatus.FAILED, t, r, reason="certify", diagnostics=diagnostics)

        state = DualState(state.alpha + outcome.alpha_units, state.beta + outcome.beta_units, params.chi, unit)
        sum_gx += g_x
        sum_gy += g_y

        if options.averaged_fail:
            averaged = level_residuals(instance.tree, sum_gx / r, sum_gy / r, t)
            if residual_fail_test(averaged, t, params.d_l, params.eps):
                return MwuResult(MwuStatus.FAILED, t, r, reason="averaged", diagnostics=diagnostics)

        if options.early_certify and verifiable:
            cert = _closing_certificate(state, r, t, tighten_costs)
            check = verify_certificate(cert, rounding)
            if check.valid:
                return MwuResult(MwuStatus.CERTIFIED, t, r, cert, check, reason="early", diagnostics=diagnostics)

    cert = _closing_certificate(state, params.R, t, tighten_costs)
    if not verifiable:
        return MwuResult(MwuStatus.CERTIFIED, t, params.R, cert, reason="unverified", diagnostics=diagnostics)
    check = verify_certificate(cert, rounding)
    status = MwuStatus.CERTIFIED if check.valid else MwuStatus.EXHAUSTED
    return MwuResult(status, t, params.R, cert, check, reason="rounds", diagnostics=diagnostics)

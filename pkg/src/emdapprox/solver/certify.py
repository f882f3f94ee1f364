"""
Certify: turn the flow divergence of lambda into tree-level duals.

With mu_i = t g_x[i] and nu_j = t g_y[j], each depth-l node v carries the
imbalance Q_v = sum_{x_i in v} (1 - t g_x[i]) - sum_{y_j in v} (1 - t g_y[j]).
The level residual is r_l = w_l * sum_v |Q_v| with w_l the parent-edge
weight of depth l, so the residuals add up to EMD_T(1 - mu, 1 - nu). A level
with r_l >= D_l eps t / h gives duals alpha_i = beta_j = w_l sign(Q_v) whose
gap over the lambda-averaged constraint is r_l / t. When no level passes,
EMD <= t max(||y||/C) + EMD_T(1 - mu, 1 - nu) / D_l, which is at most
(1+3eps) t for the rounded costs.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..core.exceptions import InputError
from ..embedding.quadtree import QuadTree
from .params import MwuParams

LEVEL_RULES = ("first", "max")


@dataclass(frozen=True)
class Certificate:
    """Duals (real units) claimed to lie in Gamma_t."""

    alpha: np.ndarray
    beta: np.ndarray
    t: float
    level: Optional[int] = None

    @property
    def value(self) -> float:
        """v = (sum alpha - sum beta) / t."""
        return float(self.alpha.sum() - self.beta.sum()) / self.t


@dataclass(frozen=True)
class CertifyOutcome:
    certificate: Optional[Certificate]
    alpha_units: Optional[np.ndarray]
    beta_units: Optional[np.ndarray]
    residuals: np.ndarray
    threshold: float
    level: Optional[int]

    @property
    def failed(self) -> bool:
        return self.certificate is None

    @property
    def gap(self) -> float:
        """Gap estimate r_l / t of the chosen level (0 on Fail)."""
        if self.level is None:
            return 0.0
        return float(self.residuals[self.level - 1]) / self.certificate.t


def dual_unit(tree: QuadTree) -> float:
    """phi / 2^h, the finest potential; every level weight is a power-of-two multiple."""
    return tree.phi / 2.0 ** tree.depth


def node_imbalances(tree: QuadTree, g_x, g_y, t: float, level: int) -> np.ndarray:
    """Q_v for every depth-`level` node; tree points are X then Y."""
    g_x = np.asarray(g_x, dtype=float)
    g_y = np.asarray(g_y, dtype=float)
    if g_x.size + g_y.size != tree.n_points:
        raise InputError(f"Tree has {tree.n_points} points, divergence covers {g_x.size + g_y.size}")
    net = np.concatenate([1.0 - t * g_x, -(1.0 - t * g_y)])
    return np.bincount(tree.node_of[level], weights=net, minlength=tree.num_nodes(level))


def level_residuals(tree: QuadTree, g_x, g_y, t: float) -> np.ndarray:
    """r_l for l = 1..h."""
    return np.array([
        tree.edge_weight(level) * float(np.abs(node_imbalances(tree, g_x, g_y, t, level)).sum())
        for level in range(1, tree.depth + 1)
    ])


def certify(g_x, g_y, t: float, params: MwuParams, tree: QuadTree, level_rule: str = "first") -> CertifyOutcome:
    """
    One Certify call on a flow divergence.

    Args:
        g_x, g_y: Flow divergence of lambda (exact or estimated)
        t: Threshold
        params: MWU schedule (D_l, eps and h set the level threshold)
        tree: Tree of the perturbed instance
        level_rule: 'first' passing level or the 'max' residual level

    Returns:
        CertifyOutcome; its certificate is None on Fail
    """
    if level_rule not in LEVEL_RULES:
        raise InputError(f"Unknown level rule '{level_rule}'. Available: {list(LEVEL_RULES)}")
    residuals = level_residuals(tree, g_x, g_y, t)
    threshold = params.d_l * params.eps * t / params.h
    passing = np.flatnonzero(residuals >= threshold)
    if passing.size == 0:
        return CertifyOutcome(None, None, None, residuals, threshold, None)

    if level_rule == "first":
        level = int(passing[0]) + 1
    else:
        level = int(np.argmax(residuals)) + 1

    alpha_units, beta_units = level_potentials(tree, g_x, g_y, t, level)
    unit = dual_unit(tree)
    cert = Certificate(alpha_units * unit, beta_units * unit, t, level)
    return CertifyOutcome(cert, alpha_units, beta_units, residuals, threshold, level)


def level_potentials(tree: QuadTree, g_x, g_y, t: float, level: int) -> Tuple[np.ndarray, np.ndarray]:
    """Integer duals (in dual units) w_l sign(Q_v) with sign(0) = +1."""
    q = node_imbalances(tree, g_x, g_y, t, level)
    signs = np.where(q >= 0, 1, -1).astype(np.int64)
    weight_units = 1 << (tree.depth - level + 1)
    n_x = np.asarray(g_x).size
    per_point = weight_units * signs[tree.node_of[level]]
    return per_point[:n_x], per_point[n_x:]


def residual_fail_test(residuals, t: float, d_l: float, eps: float) -> bool:
    """
    Sound Fail on the summed residual: EMD_T(1 - mu, 1 - nu) <= eps D_l t
    gives EMD <= t max(||y||/C) + eps t.
    """
    return float(np.sum(residuals)) <= eps * d_l * t


def special_constraint_terms(lam: np.ndarray, costs: np.ndarray, cert: Certificate) -> List[float]:
    """
    (lambda-averaged constraint, v, max |alpha_i - beta_j| / C_ij) for a
    dense lambda table, used to check the three Certify conditions.
    """
    diff = cert.alpha[:, None] - cert.beta[None, :]
    averaged = float(((lam[..., 0] - lam[..., 1]) * diff / costs).sum())
    return [averaged, cert.value, float(np.max(np.abs(diff) / costs))]

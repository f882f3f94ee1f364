"""
Embed-and-perturb: draw a quadtree, then append coordinates that move every
point by a small amount tied to its root-to-leaf path. Pairs split high in
the tree drift apart, which bounds how much d_T can overstate the l1
distance.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..core.exceptions import InputError
from ..geometry.points import PointSet, pairwise_l1
from ..utils.seeding import SeedLike, derive_rng
from .aspect_ratio import pad_dimension
from .quadtree import QuadTree, sample_quadtree, tree_distance_matrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PerturbedInstance:
    """Perturbed points, their tree, and distortion bounds D_l <= d_T/||y|| <= D_u."""

    Y: PointSet
    tree: QuadTree
    d_l: float
    d_u: float
    eps_prime: float
    d_prime: int

    @property
    def n(self) -> int:
        return self.Y.n

    @property
    def distortion(self) -> float:
        """D_T = D_u / D_l."""
        return self.d_u / self.d_l


def embed_and_perturb(P, eps: float, seed: SeedLike = None, phi: Optional[float] = None,
                      constant: float = 1.0, d_u_factor: float = 8.0,
                      d_prime: Optional[int] = None) -> PerturbedInstance:
    """
    Sample T and perturb P along its paths.

    Node v at depth l draws z_v ~ U[0, eps' phi / 2^l]^{d'} with
    eps' = constant * eps / log2(phi); point i gets (x_i, (1/d') * sum of
    z over its path).

    Returns:
        PerturbedInstance with the w.h.p. bounds D_l = eps / log2(phi) and
        D_u = d_u_factor * ln n
    """
    if not (0 < eps <= 1):
        raise InputError(f"eps must be in (0, 1], got {eps}")
    if isinstance(P, PointSet):
        pts = P.points
        phi = P.phi if phi is None else phi
    else:
        pts = np.asarray(P, dtype=float)
    if phi is None:
        raise InputError("embed_and_perturb needs phi")

    n = pts.shape[0]
    log_phi = max(1.0, math.log2(phi))
    eps_prime = constant * eps / log_phi
    d_prime = pad_dimension(n) if d_prime is None else d_prime

    tree = sample_quadtree(pts, phi, derive_rng(seed, 0))
    rng = derive_rng(seed, 1)

    offset = np.zeros((n, d_prime))
    for level in range(tree.depth + 1):
        z = rng.uniform(0.0, eps_prime * phi / 2.0 ** level, size=(tree.num_nodes(level), d_prime))
        offset += z[tree.node_of[level]]
    offset /= d_prime

    y_phi = phi * (1.0 + 2.0 * eps_prime)
    Y = PointSet(np.hstack([pts, offset]), y_phi)
    d_l = eps / log_phi
    d_u = d_u_factor * math.log(max(n, 2))
    logger.debug(f"Embedded {n} points: depth {tree.depth}, d'={d_prime}, eps'={eps_prime:.4g}")
    return PerturbedInstance(Y=Y, tree=tree, d_l=d_l, d_u=d_u, eps_prime=eps_prime, d_prime=d_prime)


def measure_distortion(instance: PerturbedInstance, rows=None, cols=None) -> Tuple[float, float]:
    """
    Smallest and largest d_T(i, j) / ||y_i - y_j||_1 over distinct points.

    Args:
        rows, cols: Index sets to compare (all points when omitted)

    Returns:
        (min ratio, max ratio); (1.0, 1.0) when no pair has positive distance
    """
    n = instance.n
    rows = np.arange(n) if rows is None else np.asarray(rows, dtype=np.int64)
    cols = np.arange(n) if cols is None else np.asarray(cols, dtype=np.int64)
    d_tree = tree_distance_matrix(instance.tree, rows, cols)
    d_l1 = pairwise_l1(instance.Y.points[rows], instance.Y.points[cols])
    mask = d_l1 > 0
    if not np.any(mask):
        return 1.0, 1.0
    ratios = d_tree[mask] / d_l1[mask]
    return float(ratios.min()), float(ratios.max())

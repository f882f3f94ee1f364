"""
Randomly shifted quadtree over [1, phi]^d.

Depth 0 is the root. A node at depth l >= 1 is a nonempty cell of the grid
with side phi / 2^(l-1) shifted by one common vector u ~ U[0, phi)^d, and
its parent edge has weight phi / 2^(l-1). Leaves sit at depth
h = ceil(log2 phi) + 1. Cells are half-open on the low side, so a point on
a boundary belongs to the smaller cell.
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..core.exceptions import InputError
from ..geometry.points import PointSet
from ..utils.seeding import SeedLike, derive_rng


@dataclass(frozen=True)
class QuadTree:
    """
    Nonempty cells per depth.

    node_of[l, i] is the index of point i's depth-l node; parents[l][v] is
    the depth-(l-1) parent of depth-l node v (parents[0] is empty).
    """

    phi: float
    depth: int
    shift: np.ndarray
    node_of: np.ndarray
    parents: Tuple[np.ndarray, ...]

    @property
    def n_points(self) -> int:
        return int(self.node_of.shape[1])

    def num_nodes(self, level: int) -> int:
        return int(self.parents[level].size) if level else 1

    def edge_weight(self, level: int) -> float:
        """Weight of the edge from a depth-level node to its parent."""
        if level < 1:
            raise InputError("The root has no parent edge")
        return self.phi / 2.0 ** (level - 1)

    @property
    def leaf_of(self) -> np.ndarray:
        return self.node_of[self.depth]

    @property
    def split_weights(self) -> np.ndarray:
        """split_weights[k] = d_T of two points whose deepest common node is at depth k."""
        weights = np.array([self.edge_weight(l) for l in range(1, self.depth + 1)])
        suffix = np.concatenate([np.cumsum(weights[::-1])[::-1], [0.0]])
        return 2.0 * suffix


def tree_depth(phi: float) -> int:
    return int(math.ceil(math.log2(max(phi, 1.0)))) + 1


def sample_quadtree(P, phi: Optional[float] = None, seed: SeedLike = None, depth: Optional[int] = None) -> QuadTree:
    """
    Draw a tree from the shifted-grid distribution.

    Args:
        P: PointSet (its phi is used when phi is None) or array
        phi: Aspect-ratio bound
        seed: Seed for the shift
        depth: Override for h, mostly for tests

    Returns:
        QuadTree over the rows of P
    """
    if isinstance(P, PointSet):
        pts = P.points
        phi = P.phi if phi is None else phi
    else:
        pts = np.asarray(P, dtype=float)
    if phi is None:
        raise InputError("sample_quadtree needs phi")
    if pts.ndim != 2:
        raise InputError(f"Points must be a 2-D array, got shape {pts.shape}")

    h = tree_depth(phi) if depth is None else int(depth)
    n, d = pts.shape
    rng = derive_rng(seed)
    shift = rng.uniform(0.0, phi, size=d)

    node_of = np.zeros((h + 1, n), dtype=np.int64)
    parents: List[np.ndarray] = [np.zeros(0, dtype=np.int64)]
    for level in range(1, h + 1):
        side = phi / 2.0 ** (level - 1)
        cells = np.ceil((pts + shift) / side).astype(np.int64) - 1
        keyed = np.column_stack([node_of[level - 1], cells])
        if n:
            unique_rows, inverse = np.unique(keyed, axis=0, return_inverse=True)
            node_of[level] = inverse.reshape(-1)
            parents.append(unique_rows[:, 0].copy())
        else:
            parents.append(np.zeros(0, dtype=np.int64))

    node_of.setflags(write=False)
    return QuadTree(phi=float(phi), depth=h, shift=shift, node_of=node_of, parents=tuple(parents))


def _common_depth(T: QuadTree, i, j) -> np.ndarray:
    same = T.node_of[:, np.asarray(i)] == T.node_of[:, np.asarray(j)]
    return same.sum(axis=0) - 1


def tree_distance(T: QuadTree, i: int, j: int) -> float:
    """Weighted path length between the leaves of points i and j."""
    k = int(_common_depth(T, i, j))
    return float(T.split_weights[k])


def tree_distance_matrix(T: QuadTree, rows, cols) -> np.ndarray:
    """d_T between every point of rows and every point of cols."""
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    common = np.zeros((rows.size, cols.size), dtype=np.int64)
    for level in range(T.depth + 1):
        common += T.node_of[level][rows][:, None] == T.node_of[level][cols][None, :]
    return T.split_weights[common - 1]


def tree_emd(T: QuadTree, mu, nu) -> float:
    """
    EMD under d_T: sum over non-root nodes of parent-edge weight times
    |mu(v) - nu(v)|.
    """
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    if mu.shape != (T.n_points,) or nu.shape != (T.n_points,):
        raise InputError(f"Masses must have length {T.n_points}")
    net = mu - nu
    if abs(net.sum()) > 1e-9 * max(1.0, np.abs(mu).sum()):
        raise InputError(f"Mass mismatch: {mu.sum():.6g} vs {nu.sum():.6g}")
    total = 0.0
    for level in range(1, T.depth + 1):
        per_node = np.bincount(T.node_of[level], weights=net, minlength=T.num_nodes(level))
        total += T.edge_weight(level) * float(np.abs(per_node).sum())
    return total


def greedy_tree_matching(T: QuadTree, x_idx, y_idx) -> Tuple[List[Tuple[int, int]], float]:
    """
    Bottom-up greedy matching of x_idx to y_idx in T.

    At each depth from the leaves up, unmatched points sharing a node are
    paired in index order. The result is an optimal matching for d_T.

    Returns:
        (list of (x, y) point indices, total d_T cost)
    """
    x_idx = np.asarray(x_idx, dtype=np.int64)
    y_idx = np.asarray(y_idx, dtype=np.int64)
    if x_idx.size != y_idx.size:
        raise InputError(f"Matching needs |X| = |Y|, got {x_idx.size} and {y_idx.size}")

    weights = T.split_weights
    open_x = {}
    open_y = {}
    for i in np.sort(x_idx):
        open_x.setdefault(int(T.node_of[T.depth, i]), []).append(int(i))
    for j in np.sort(y_idx):
        open_y.setdefault(int(T.node_of[T.depth, j]), []).append(int(j))

    matching: List[Tuple[int, int]] = []
    total = 0.0
    for level in range(T.depth, -1, -1):
        if level < T.depth:
            open_x = _lift(open_x, T.parents[level + 1])
            open_y = _lift(open_y, T.parents[level + 1])
        for node in sorted(open_x.keys() & open_y.keys()):
            xs, ys = open_x[node], open_y[node]
            k = min(len(xs), len(ys))
            matching.extend(zip(xs[:k], ys[:k]))
            total += k * float(weights[level])
            open_x[node] = xs[k:]
            open_y[node] = ys[k:]
        open_x = {v: pts for v, pts in open_x.items() if pts}
        open_y = {v: pts for v, pts in open_y.items() if pts}

    return matching, total


def _lift(open_points, parent_of: np.ndarray):
    lifted = {}
    for node in sorted(open_points):
        lifted.setdefault(int(parent_of[node]), []).extend(open_points[node])
    for pts in lifted.values():
        pts.sort()
    return lifted


def greedy_tree_bound(T: QuadTree, x_idx, y_idx) -> float:
    """t0 = EMD_T(X, Y) from the greedy matching."""
    return greedy_tree_matching(T, x_idx, y_idx)[1]

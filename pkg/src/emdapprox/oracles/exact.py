"""
Exact EMD, 1-D EMD, brute-force closest pair and the explicit MWU table.
"""

from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np
from scipy.special import logsumexp

from ..core.exceptions import InputError
from ..geometry.points import PointSet, SupplyDemand, pairwise_l1
from .assignment import hungarian


@dataclass(frozen=True)
class FlowSolution:
    """Optimal transport plan; flow maps (source, sink) to mass."""

    flow: Dict[Tuple[int, int], float] = field(default_factory=dict)
    cost: float = 0.0


def _points(P) -> np.ndarray:
    return P.points if isinstance(P, PointSet) else np.asarray(P, dtype=float)


def exact_emd(X, Y) -> float:
    """Minimum-cost perfect matching between X and Y under l1."""
    xp, yp = _points(X), _points(Y)
    if xp.shape[0] != yp.shape[0]:
        raise InputError(f"EMD needs |X| = |Y|, got {xp.shape[0]} and {yp.shape[0]}")
    if xp.shape[0] == 0:
        return 0.0
    _, total = hungarian(pairwise_l1(xp, yp))
    return total


def exact_flow(cost_matrix, b) -> FlowSolution:
    """
    Min-cost transport for supply b over a square cost matrix.

    Every supply unit becomes an assignment row and every demand unit a
    column, so the plan is integral.
    """
    supply = b if isinstance(b, SupplyDemand) else SupplyDemand(np.asarray(b))
    cost = np.asarray(cost_matrix, dtype=float)
    if cost.shape != (len(supply), len(supply)):
        raise InputError(f"Cost matrix shape {cost.shape} does not match supply length {len(supply)}")
    if supply.is_zero:
        return FlowSolution()

    src = supply.sources()
    snk = supply.sinks()
    rows = np.repeat(src, supply.b[src])
    cols = np.repeat(snk, -supply.b[snk])
    assignment, total = hungarian(cost[np.ix_(rows, cols)])

    flow = Counter()
    for r, c in enumerate(assignment):
        flow[(int(rows[r]), int(cols[c]))] += 1.0
    return FlowSolution(flow=dict(sorted(flow.items())), cost=total)


def exact_emd_supply(X, b) -> FlowSolution:
    """EMD_X(b) with its optimal plan."""
    xp = _points(X)
    supply = b if isinstance(b, SupplyDemand) else SupplyDemand(np.asarray(b))
    if len(supply) != xp.shape[0]:
        raise InputError(f"Supply length {len(supply)} does not match {xp.shape[0]} points")
    if supply.is_zero:
        return FlowSolution()
    return exact_flow(pairwise_l1(xp, xp), supply)


def one_d_emd(positions, b) -> float:
    """
    EMD on the line via the prefix-sum identity
    sum_k |b_1 + ... + b_k| * (pos_{k+1} - pos_k).
    """
    pos = np.asarray(positions, dtype=float).ravel()
    supply = b if isinstance(b, SupplyDemand) else SupplyDemand(np.asarray(b))
    if pos.size != len(supply):
        raise InputError(f"{pos.size} positions for a supply of length {len(supply)}")
    if pos.size < 2:
        return 0.0
    gaps = np.diff(pos)
    if np.any(gaps < 0):
        raise InputError("Positions must be sorted ascending")
    prefix = np.cumsum(supply.b)[:-1]
    return float(np.abs(prefix) @ gaps)


def brute_closest_pair(A, B) -> Tuple[int, int, float]:
    """Exact closest cross pair, lexicographically first on ties."""
    ap, bp = _points(A), _points(B)
    if ap.shape[0] == 0 or bp.shape[0] == 0:
        raise InputError("Closest pair needs two nonempty sets")
    dists = pairwise_l1(ap, bp)
    i, j = np.unravel_index(int(np.argmin(dists)), dists.shape)
    return int(i), int(j), float(dists[i, j])


def explicit_lambda(eta: float, C, D, P) -> np.ndarray:
    """
    MWU distribution over (i, j, sigma), normalised in log space.

    Entry [i, j, 0] is sigma = +1 and [i, j, 1] is sigma = -1; each is
    proportional to exp(eta * sigma * P_ij * D_ij / C_ij).
    """
    C = np.asarray(C, dtype=float)
    D = np.asarray(D, dtype=float)
    P = np.asarray(P, dtype=float)
    if not (C.shape == D.shape == P.shape) or C.ndim != 2:
        raise InputError(f"C, D, P must be matrices of one shape, got {C.shape}, {D.shape}, {P.shape}")
    if C.size and C.min() <= 0:
        raise InputError("Costs must be positive")
    exponent = eta * P * D / C
    log_w = np.stack([exponent, -exponent], axis=-1)
    return np.exp(log_w - logsumexp(log_w))

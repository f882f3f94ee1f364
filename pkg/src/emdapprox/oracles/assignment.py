"""
Min-cost assignment by successive shortest paths with potentials.

Rows are inserted one at a time; each insertion runs a Dijkstra-style scan
over the columns using reduced costs, then augments along the found path.
The column scan is vectorised, the outer loops are O(n * m).
"""

from typing import Tuple

import numpy as np

from ..core.exceptions import InputError


def hungarian(cost) -> Tuple[np.ndarray, float]:
    """
    Solve min sum_i cost[i, col[i]] over injective col.

    Args:
        cost: (n, m) matrix with n <= m, or any shape (transposed internally)

    Returns:
        (col, total) where col[i] is the column matched to row i
    """
    a = np.asarray(cost, dtype=float)
    if a.ndim != 2:
        raise InputError(f"Cost must be a matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError("Cost matrix has non-finite entries")
    n, m = a.shape
    if n == 0 or m == 0:
        return np.zeros(0, dtype=np.int64), 0.0
    if n > m:
        cols_t, total = hungarian(a.T)
        rows = np.full(n, -1, dtype=np.int64)
        rows[cols_t] = np.arange(m)
        return rows, total

    # 1-based with a virtual column 0
    u = np.zeros(n + 1)
    v = np.zeros(m + 1)
    p = np.zeros(m + 1, dtype=np.int64)
    way = np.zeros(m + 1, dtype=np.int64)
    padded = np.zeros((n + 1, m + 1))
    padded[1:, 1:] = a

    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(m + 1, np.inf)
        used = np.zeros(m + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            cur = padded[i0] - u[i0] - v
            free = ~used
            better = free & (cur < minv)
            minv[better] = cur[better]
            way[better] = j0
            masked = np.where(free, minv, np.inf)
            j1 = int(np.argmin(masked))
            delta = masked[j1]
            u[p[used]] += delta
            v[used] -= delta
            minv[free] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break

    col = np.full(n, -1, dtype=np.int64)
    for j in range(1, m + 1):
        if p[j]:
            col[p[j] - 1] = j - 1
    total = float(a[np.arange(n), col].sum())
    return col, total

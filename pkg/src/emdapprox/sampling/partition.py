"""
Tiling of the pair grid into D-constant rectangles.

With alpha and beta sorted, the level code of alpha_p - beta_q is monotone
along every row and column, so each code class Q_s meets every row in one
interval [a(p), b(p)] and both endpoints move right as p grows. Rows are cut
into bands of ceil(sqrt n); a band whose rows all meet Q_s in intervals
sharing at least ceil(sqrt n) columns yields a block. The zero class is
tiled by the equal-value blocks A_x x B_x. Blocks are cut into
ceil(n^(1/4)) squares; everything left over goes to the explicit set E.
"""

import math
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .duals import DualState, decode_level, rounded_level


@dataclass(frozen=True)
class Rectangle:
    """I x J of global indices with a single level code."""

    rows: np.ndarray
    cols: np.ndarray
    code: int
    D: float
    P: int

    @property
    def size(self) -> int:
        return int(self.rows.size * self.cols.size)

    @property
    def kappa(self) -> float:
        """Signed rounded difference P * D."""
        return self.P * self.D


@dataclass(frozen=True)
class RectanglePartition:
    n_x: int
    n_y: int
    explicit: np.ndarray
    rects: Tuple[Rectangle, ...]
    side: int
    band: int

    def cover_counts(self) -> np.ndarray:
        """How often each pair is covered; all ones for a valid partition."""
        counts = np.zeros((self.n_x, self.n_y), dtype=np.int64)
        if self.explicit.size:
            np.add.at(counts, (self.explicit[:, 0], self.explicit[:, 1]), 1)
        for rect in self.rects:
            counts[np.ix_(rect.rows, rect.cols)] += 1
        return counts


def _row_runs(codes: np.ndarray):
    """(row, first col, last col, code) of every maximal constant run."""
    n_x, n_y = codes.shape
    starts = np.ones((n_x, n_y), dtype=bool)
    starts[:, 1:] = codes[:, 1:] != codes[:, :-1]
    rows, firsts = np.nonzero(starts)
    lasts = np.empty_like(firsts)
    lasts[:-1] = np.where(rows[1:] == rows[:-1], firsts[1:] - 1, n_y - 1)
    if lasts.size:
        lasts[-1] = n_y - 1
    return rows, firsts, lasts, codes[rows, firsts]


def _tile(block_rows: Tuple[int, int], block_cols: Tuple[int, int], side: int) -> List[Tuple[int, int]]:
    """Top-left corners of full side x side squares inside the block."""
    r0, r1 = block_rows
    c0, c1 = block_cols
    corners = []
    for r in range(r0, r1 - side + 2, side):
        if r + side - 1 > r1:
            break
        for c in range(c0, c1 - side + 2, side):
            if c + side - 1 > c1:
                break
            corners.append((r, c))
    return corners


def partition_rectangles(state: DualState, n: int = None) -> RectanglePartition:
    """
    Partition X x Y into E and D-constant squares.

    Args:
        state: Dual state
        n: Size parameter for the band and square sides (max(|X|, |Y|) when None)

    Returns:
        RectanglePartition; E and the squares cover each pair exactly once
    """
    n_x, n_y = state.n_x, state.n_y
    n = max(n_x, n_y) if n is None else n
    band = max(1, int(math.ceil(math.sqrt(n))))
    side = max(1, int(math.ceil(n ** 0.25)))

    order_a = np.argsort(state.alpha, kind="stable")
    order_b = np.argsort(state.beta, kind="stable")
    diff = (state.alpha[order_a][:, None] - state.beta[order_b][None, :]).astype(float) * state.unit
    codes = rounded_level(diff, state.chi)

    blocks: List[Tuple[Tuple[int, int], Tuple[int, int], int]] = []
    rows, firsts, lasts, run_codes = _row_runs(codes)
    order = np.lexsort((rows, run_codes))
    rows, firsts, lasts, run_codes = rows[order], firsts[order], lasts[order], run_codes[order]
    group_bounds = np.flatnonzero(np.diff(run_codes)) + 1
    for members in np.split(np.arange(rows.size), group_bounds):
        if members.size == 0:
            continue
        code = int(run_codes[members[0]])
        g_rows, g_first, g_last = rows[members], firsts[members], lasts[members]
        if code == 0:
            # rows sharing an alpha value share the same column interval
            keys = np.column_stack([g_first, g_last])
            _, block_id = np.unique(keys, axis=0, return_inverse=True)
            block_id = block_id.reshape(-1)
            for b in np.unique(block_id):
                sel = block_id == b
                r0, r1 = int(g_rows[sel].min()), int(g_rows[sel].max())
                c0, c1 = int(g_first[sel][0]), int(g_last[sel][0])
                if r1 - r0 + 1 >= band and c1 - c0 + 1 >= band:
                    blocks.append(((r0, r1), (c0, c1), code))
            continue
        band_of = g_rows // band
        for b in np.unique(band_of):
            sel = band_of == b
            r0 = int(b * band)
            r1 = min(r0 + band, n_x) - 1
            if int(sel.sum()) != r1 - r0 + 1:
                continue
            lo, hi = int(g_first[sel].max()), int(g_last[sel].min())
            if hi - lo + 1 >= band:
                blocks.append(((r0, r1), (lo, hi), code))

    covered = np.zeros((n_x, n_y), dtype=bool)
    rects: List[Rectangle] = []
    for block_rows, block_cols, code in blocks:
        D, P = decode_level(np.array([code]), state.chi)
        for r, c in _tile(block_rows, block_cols, side):
            covered[r:r + side, c:c + side] = True
            rects.append(Rectangle(
                rows=order_a[r:r + side].copy(),
                cols=order_b[c:c + side].copy(),
                code=code,
                D=float(D[0]),
                P=int(P[0]),
            ))

    leftover = np.argwhere(~covered)
    explicit = np.column_stack([order_a[leftover[:, 0]], order_b[leftover[:, 1]]]).astype(np.int64)
    return RectanglePartition(
        n_x=n_x,
        n_y=n_y,
        explicit=explicit.reshape(-1, 2),
        rects=tuple(rects),
        side=side,
        band=band,
    )

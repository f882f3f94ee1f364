"""Exponential search over thresholds t_k = t_lo (1+eps)^k."""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

from ..core.logging_utils import ProgressLogger
from .mwu import MwuResult

logger = logging.getLogger(__name__)


@dataclass
class SearchResult:
    t_star: float
    k_star: int
    k_max: int
    probes: Dict[int, str] = field(default_factory=dict)
    runs: List[MwuResult] = field(default_factory=list)

    @property
    def upward_closed(self) -> bool:
        """No certified probe sits above a non-certified one."""
        ordered = [self.probes[k] for k in sorted(self.probes)]
        seen_fail = False
        for status in ordered:
            if status != "certified":
                seen_fail = True
            elif seen_fail:
                return False
        return True


def threshold_count(t_lo: float, t_hi: float, eps: float) -> int:
    """Smallest k_max with t_lo (1+eps)^k_max >= t_hi."""
    if t_hi <= t_lo:
        return 0
    return int(math.ceil(math.log(t_hi / t_lo) / math.log1p(eps) - 1e-12))


def search_threshold(run_at: Callable[[int, float], MwuResult], t_lo: float, t_hi: float, eps: float,
                     progress: Optional[ProgressLogger] = None) -> SearchResult:
    """
    Smallest t_k at which the run does not certify.

    Galloping from k = 0 (1, 3, 7, ... above the last certified index)
    brackets the answer, then binary search closes it. t_k_max >= t_hi is
    treated as not certified without a run. A run that ends EXHAUSTED
    counts as not certified, the same as FAILED: only verified
    certificates move the answer up, so t_star < (1+eps) EMD_C whatever
    the schedule.

    Args:
        run_at: Callable (k, t_k) -> MwuResult
        t_lo, t_hi: Bracket with EMD in [t_lo, t_hi]
        eps: Ratio between consecutive thresholds is 1 + eps
        progress: Optional progress logger

    Returns:
        SearchResult
    """
    k_max = threshold_count(t_lo, t_hi, eps)
    result = SearchResult(t_star=t_lo, k_star=0, k_max=k_max)
    if progress:
        progress.start_search(t_lo, t_hi, k_max + 1)

    def t_of(k: int) -> float:
        return t_lo * (1.0 + eps) ** k

    def certified(k: int) -> bool:
        if k >= k_max:
            return False
        t = t_of(k)
        if progress:
            progress.start_run(k, t)
        run = run_at(k, t)
        result.runs.append(run)
        result.probes[k] = run.status.value
        if progress:
            progress.end_run(k, run.status.value, run.rounds)
        return run.certified

    lo, hi = -1, None
    step = 1
    k = 0
    while hi is None:
        if certified(k):
            lo = k
            k = lo + step
            step *= 2
            if k >= k_max:
                k = k_max
        else:
            hi = k

    while hi - lo > 1:
        mid = (lo + hi) // 2
        if certified(mid):
            lo = mid
        else:
            hi = mid

    result.k_star = hi
    result.t_star = t_of(hi)
    if not result.upward_closed:
        logger.info(f"Probed outcomes are not upward closed: {dict(sorted(result.probes.items()))}")
    if progress:
        progress.end_search(result.t_star)
    return result

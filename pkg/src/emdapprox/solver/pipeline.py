"""
End-to-end EMD estimate.

Coincident points cancel first. The remaining points are split into parts
of polynomial aspect ratio; each part is embedded and perturbed, bracketed
by its greedy tree bound, and searched with the MWU run as the test at
every threshold. Part estimates are mapped back by their scales and summed.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Union

import numpy as np

from ..closepairs.cp_oracle import CpOracle, CpOracleRegistry
from ..core.defaults import SolverDefaultsManager
from ..core.exceptions import InputError
from ..core.logging_utils import ProgressLogger
from ..embedding.aspect_ratio import ReducedPart, reduce_aspect_ratio
from ..embedding.perturb import embed_and_perturb, measure_distortion
from ..embedding.quadtree import greedy_tree_bound
from ..geometry.points import PointSet, dedup_and_cancel, l1_distance
from ..geometry.rounding import draw_rounding_state
from ..sampling.shatter import ShatterSet, draw_rounding_set, shatter_size
from ..sampling.sources import ExplicitLambdaSource, LambdaSource, SampledLambdaSource
from ..utils.seeding import SeedLike, derive_seed
from .mwu import MwuOptions, mwu_run
from .params import MwuParams, compute_params
from .search import SearchResult, search_threshold

logger = logging.getLogger(__name__)

LAMBDA_SOURCES = ("auto", "explicit", "sampler")


@dataclass
class PartResult:
    n: int
    estimate: float
    scale: float
    t0: Optional[float] = None
    t_star: Optional[float] = None
    d_l: Optional[float] = None
    d_u: Optional[float] = None
    lambda_source: Optional[str] = None
    params: Optional[MwuParams] = None
    search: Optional[SearchResult] = None

    def summary(self) -> Dict:
        out = {
            "n": self.n,
            "estimate": self.estimate,
            "scale": self.scale,
            "t0": self.t0,
            "t_star": self.t_star,
            "d_l": self.d_l,
            "d_u": self.d_u,
            "lambda_source": self.lambda_source,
        }
        if self.search is not None:
            out["k_star"] = self.search.k_star
            out["k_max"] = self.search.k_max
            out["probes"] = {str(k): v for k, v in sorted(self.search.probes.items())}
            out["upward_closed"] = self.search.upward_closed
        return out


@dataclass
class EmdEstimate:
    value: float
    parts: List[PartResult] = field(default_factory=list)

    @property
    def params(self) -> List[Dict]:
        return [p.params.as_dict() for p in self.parts if p.params is not None]

    @property
    def diagnostics(self) -> List[Dict]:
        records = []
        for index, part in enumerate(self.parts):
            if part.search is None:
                continue
            for run in part.search.runs:
                for record in run.diagnostics:
                    records.append({"part": index, "status": run.status.value, **record})
        return records


def _resolve_oracle(oracle: Union[str, CpOracle]) -> CpOracle:
    return CpOracleRegistry.get_oracle(oracle) if isinstance(oracle, str) else oracle


def choose_source(lambda_source: str, n: int, explicit_limit: int) -> str:
    if lambda_source not in LAMBDA_SOURCES:
        raise InputError(f"Unknown lambda source '{lambda_source}'. Available: {list(LAMBDA_SOURCES)}")
    if lambda_source == "auto":
        return "explicit" if n <= explicit_limit else "sampler"
    return lambda_source


def prepare_part(part: ReducedPart, eps: float, mode: str, seed: SeedLike,
                 defaults: SolverDefaultsManager):
    """
    Embed one part with its sources first and bracket its EMD.

    Returns:
        (instance, n_x, t0, d_l, d_u)
    """
    order = np.concatenate([np.flatnonzero(part.supply.b > 0), np.flatnonzero(part.supply.b < 0)])
    n_x = int(np.count_nonzero(part.supply.b > 0))
    points = PointSet(part.points.points[order], part.phi)
    instance = embed_and_perturb(
        points, eps, seed,
        constant=defaults.get('tree', 'perturbation_constant'),
        d_u_factor=defaults.get('mwu', 'd_u_factor'),
    )
    t0 = greedy_tree_bound(instance.tree, np.arange(n_x), np.arange(n_x, order.size))

    d_l, d_u = instance.d_l, instance.d_u
    if mode == "practical" and defaults.get('practical', 'measured_distortion'):
        low, high = measure_distortion(instance)
        if low > 0:
            d_l, d_u = low, high
        else:
            logger.warning("Measured distortion is degenerate, keeping the w.h.p. bounds")
    return instance, n_x, t0, d_l, d_u


def solve_part(part: ReducedPart, eps: float, phi_exp: float, oracle: CpOracle, seed: SeedLike,
               mode: str, lambda_source: str, defaults: SolverDefaultsManager,
               relax: Optional[float] = None, progress: Optional[ProgressLogger] = None) -> PartResult:
    """Search one reduced part; its estimate is in the part's own scale."""
    n = int(np.count_nonzero(part.supply.b > 0))
    if n == 1:
        pts = part.points.points
        dist = l1_distance(pts[part.supply.b > 0][0], pts[part.supply.b < 0][0])
        return PartResult(n=1, estimate=float(dist), scale=part.scale, t_star=float(dist))

    instance, n_x, t0, d_l, d_u = prepare_part(part, eps, mode, derive_seed(seed, 0), defaults)
    params = compute_params(n, part.phi, eps, mode, d_l=d_l, d_u=d_u, defaults=defaults, relax=relax)
    practical = defaults.section('practical')
    source_name = choose_source(lambda_source, n, int(practical['explicit_limit']))

    X = instance.Y.points[:n_x]
    Y = instance.Y.points[n_x:]
    if source_name == "explicit" and mode == "practical" and not practical['down_round_explicit']:
        S = ShatterSet.empty(n, n)
    else:
        S = draw_rounding_set(n, phi_exp, derive_seed(seed, 1), size=shatter_size(n, phi_exp))
    rounding = draw_rounding_state(X, Y, eps, S)
    source: LambdaSource
    if source_name == "explicit":
        source = ExplicitLambdaSource(rounding, params.eta)
    else:
        source = SampledLambdaSource(
            rounding, params.eta, S, oracle, params.s, phi_exp=phi_exp, phi=instance.Y.phi,
            sampler_config=defaults.section('sampler'), close_pairs_config=defaults.section('close_pairs'),
        )
    options = MwuOptions.for_mode(mode, practical)

    t_lo, t_hi = t0 / d_u, t0 / d_l
    logger.debug(f"Part with n={n}: t0={t0:.6g}, D_l={d_l:.4g}, D_u={d_u:.4g}, source={source_name}")

    def run_at(k: int, t: float):
        return mwu_run(instance, rounding, t, params, source, derive_seed(seed, 2, k), options, progress)

    search = search_threshold(run_at, t_lo, t_hi, eps, progress)
    return PartResult(
        n=n, estimate=search.t_star, scale=part.scale, t0=t0, t_star=search.t_star,
        d_l=d_l, d_u=d_u, lambda_source=source_name, params=params, search=search,
    )


def approximate_emd(X, Y, eps: float = 0.25, phi_exp: float = 0.5, oracle: Union[str, CpOracle] = "brute",
                    seed: SeedLike = 0, mode: str = "practical", lambda_source: str = "auto",
                    defaults: Optional[SolverDefaultsManager] = None, relax: Optional[float] = None,
                    progress: Optional[ProgressLogger] = None) -> EmdEstimate:
    """
    (1 + O(eps))-approximate EMD between equal-size point sets.

    Args:
        X, Y: Point sets of equal size
        eps: Accuracy in (0, 1/2)
        phi_exp: Sublinearity exponent in (0, 1)
        oracle: Closest-pair oracle name or instance
        seed: Root seed
        mode: 'faithful' or 'practical'
        lambda_source: 'auto', 'explicit' or 'sampler'
        defaults: Solver defaults
        relax: Practical relaxation factor override
        progress: Optional progress logger

    Returns:
        EmdEstimate with the summed value and per-part details
    """
    X = X if isinstance(X, PointSet) else PointSet(X)
    Y = Y if isinstance(Y, PointSet) else PointSet(Y)
    if X.n != Y.n:
        raise InputError(f"|X| = {X.n} and |Y| = {Y.n} differ")
    if not (0 < eps < 0.5):
        raise InputError(f"eps must be in (0, 0.5), got {eps}")
    if not (0 < phi_exp < 1):
        raise InputError(f"phi_exp must be in (0, 1), got {phi_exp}")
    defaults = defaults or SolverDefaultsManager()
    cp_oracle = _resolve_oracle(oracle)
    choose_source(lambda_source, 0, 0)

    X, Y = dedup_and_cancel(X, Y)
    if X.n == 0:
        return EmdEstimate(value=0.0)
    if X.n == 1:
        return EmdEstimate(value=float(l1_distance(X.points[0], Y.points[0])))

    P = np.vstack([X.points, Y.points])
    b = np.concatenate([np.ones(X.n, dtype=np.int64), -np.ones(Y.n, dtype=np.int64)])
    reduced = reduce_aspect_ratio(
        P, b, eps, derive_seed(seed, 0),
        side_factor=defaults.get('aspect_ratio', 'grid_side_factor'),
        max_retries=defaults.get('aspect_ratio', 'max_retries'),
    )
    logger.info(f"Reduced {X.n} pairs to {len(reduced)} part(s), phi <= {reduced.phi:.6g}")

    parts: List[PartResult] = []
    for k, part in enumerate(reduced.parts):
        sources = part.source_indices[part.supply.b > 0]
        if sources.size == 1:
            sink = part.source_indices[part.supply.b < 0][0]
            dist = float(l1_distance(P[sources[0]], P[sink]))
            parts.append(PartResult(n=1, estimate=dist, scale=part.scale, t_star=dist * part.scale))
            continue
        result = solve_part(part, eps, phi_exp, cp_oracle, derive_seed(seed, 1, k), mode,
                            lambda_source, defaults, relax, progress)
        result.estimate = result.estimate / part.scale
        parts.append(result)

    value = float(sum(p.estimate for p in parts))
    return EmdEstimate(value=value, parts=parts)

"""
CLI commands.

Each command takes the resolved RunConfig and a CommandContext and returns
(result, diagnostics). run_command wraps the call into a RunReport and
maps package errors to exit codes.

To add a command:

    @CommandRegistry.register('name')
    def run_name(config: RunConfig, context: CommandContext):
        ...
        return result, diagnostics
"""

import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from .closepairs import CpOracleRegistry, classify_vertices, find_close_pairs
from .core.defaults import SolverDefaultsManager
from .core.exceptions import EmdApproxError, InputError, SelfTestError
from .core.logging_utils import ProgressLogger
from .embedding.aspect_ratio import reduce_aspect_ratio
from .embedding.perturb import measure_distortion
from .embedding.quadtree import sample_quadtree, tree_distance_matrix, tree_emd
from .geometry.points import PointSet, SupplyDemand, dedup_and_cancel
from .geometry.rounding import draw_rounding_state, level_sets
from .models.run import MwuParamsModel, RunConfig, RunReport, to_builtin
from .oracles.exact import exact_emd, exact_emd_supply, exact_flow, explicit_lambda, one_d_emd
from .sampling.arbitrary_sampler import ArbitrarySampler
from .sampling.duals import DualState, round_duals
from .sampling.partition import partition_rectangles
from .sampling.shatter import draw_rounding_set, shatter_size
from .solver.pipeline import approximate_emd, prepare_part
from .utils.io import load_points, load_supply
from .utils.seeding import derive_rng, derive_seed
from .utils.synthetic import line_instance, random_instance

logger = logging.getLogger(__name__)

Result = Tuple[Dict, List[Dict]]


@dataclass
class CommandContext:
    defaults: SolverDefaultsManager
    progress: Optional[ProgressLogger] = None
    timings: Dict[str, float] = field(default_factory=dict)

    def timed(self, name: str, func: Callable, *args, **kwargs):
        start = time.perf_counter()
        try:
            return func(*args, **kwargs)
        finally:
            self.timings[name] = self.timings.get(name, 0.0) + time.perf_counter() - start


class CommandRegistry:
    """Registry for managing CLI commands."""

    _commands: Dict[str, Callable[[RunConfig, CommandContext], Result]] = {}

    @classmethod
    def register(cls, name: str):
        """Decorator to register a command."""
        def decorator(func):
            if name in cls._commands:
                logger.warning(f"Overwriting command '{name}'")
            cls._commands[name] = func
            return func
        return decorator

    @classmethod
    def get_command(cls, name: str):
        """Get a registered command."""
        if name not in cls._commands:
            raise InputError(f"Unknown command: '{name}'. Available: {cls.list_commands()}")
        return cls._commands[name]

    @classmethod
    def list_commands(cls) -> List[str]:
        return sorted(cls._commands.keys())


def _require(config: RunConfig, *names: str):
    missing = [f"--{name}" for name in names if getattr(config, name) is None]
    if missing:
        raise InputError(f"Command '{config.command.value}' needs {', '.join(missing)}")


def _load_pair(config: RunConfig) -> Tuple[PointSet, PointSet]:
    _require(config, 'x', 'y')
    X = load_points(config.x)
    Y = load_points(config.y)
    if X.d != Y.d:
        raise InputError(f"Dimension mismatch: X has d={X.d}, Y has d={Y.d}")
    return X, Y


@CommandRegistry.register('exact')
def run_exact(config: RunConfig, context: CommandContext) -> Result:
    """Exact EMD: Hungarian on X, Y or min-cost flow on X with supply b."""
    if config.b is not None:
        _require(config, 'x')
        X = load_points(config.x)
        b = load_supply(config.b)
        if len(b) != X.n:
            raise InputError(f"Supply has {len(b)} entries for {X.n} points")
        solution = context.timed("exact", exact_emd_supply, X, b)
        return {"emd": solution.cost, "n": X.n, "total_supply": b.total}, []
    X, Y = _load_pair(config)
    value = context.timed("exact", exact_emd, X, Y)
    return {"emd": value, "n": X.n}, []


def _reduced(X: PointSet, Y: PointSet, config: RunConfig, context: CommandContext):
    X, Y = dedup_and_cancel(X, Y)
    if X.n == 0:
        return None
    P = np.vstack([X.points, Y.points])
    b = np.concatenate([np.ones(X.n, dtype=np.int64), -np.ones(Y.n, dtype=np.int64)])
    return context.timed(
        "reduce", reduce_aspect_ratio, P, b, config.eps, derive_seed(config.seed, 0),
        side_factor=context.defaults.get('aspect_ratio', 'grid_side_factor'),
        max_retries=context.defaults.get('aspect_ratio', 'max_retries'),
    )


@CommandRegistry.register('tree')
def run_tree(config: RunConfig, context: CommandContext) -> Result:
    """Greedy tree bound t0 per part, with the measured distortion of each tree."""
    X, Y = _load_pair(config)
    if X.n != Y.n:
        raise InputError(f"|X| = {X.n} and |Y| = {Y.n} differ")
    reduced = _reduced(X, Y, config, context)
    if reduced is None:
        return {"tree_emd": 0.0, "parts": []}, []

    parts = []
    total = 0.0
    for k, part in enumerate(reduced.parts):
        instance, n_x, t0, d_l, d_u = context.timed(
            "embed", prepare_part, part, config.eps, config.mode.value,
            derive_seed(config.seed, 1, k, 0), context.defaults,
        )
        low, high = measure_distortion(instance, np.arange(n_x), np.arange(n_x, instance.n))
        total += t0 / part.scale
        parts.append({
            "n": n_x,
            "t0": t0 / part.scale,
            "bracket": [t0 / d_u / part.scale, t0 / d_l / part.scale],
            "distortion_min": low,
            "distortion_max": high,
            "depth": instance.tree.depth,
        })
    return {"tree_emd": total, "parts": parts}, []


@CommandRegistry.register('approx')
def run_approx(config: RunConfig, context: CommandContext) -> Result:
    """Full pipeline; compares with the exact oracle when the instance is small."""
    X, Y = _load_pair(config)
    estimate = context.timed(
        "approx", approximate_emd, X, Y, config.eps, config.phi_exp, config.oracle.value, config.seed,
        config.mode.value, config.lambda_source.value, context.defaults, config.relax, context.progress,
    )
    result = {
        "emd": estimate.value,
        "parts": [p.summary() for p in estimate.parts],
        "params": [MwuParamsModel(**p).model_dump() for p in estimate.params],
    }
    if X.n <= context.defaults.get('bench', 'exact_limit'):
        exact = context.timed("exact", exact_emd, X, Y)
        result["exact"] = exact
        result["ratio"] = estimate.value / exact if exact > 0 else (1.0 if estimate.value == 0 else math.inf)
    return result, estimate.diagnostics


def _close_pairs_options(context: CommandContext) -> Dict:
    cp = context.defaults.section('close_pairs')
    return {key: cp[key] for key in ('k1', 'k2', 'frequency_threshold', 'prefix_sample_factor')}


@CommandRegistry.register('closepairs')
def run_closepairs(config: RunConfig, context: CommandContext) -> Result:
    """FindClosePairs on X, Y; checked against brute force when small."""
    X, Y = _load_pair(config)
    oracle = CpOracleRegistry.get_oracle(config.oracle.value)
    found = context.timed(
        "closepairs", find_close_pairs, oracle, X, Y, config.phi_exp, config.eps, config.seed,
        **_close_pairs_options(context),
    )
    result = {
        "t": found.t,
        "z": found.z,
        "pairs": [list(p) for p in sorted(found.pairs)],
        "frequent": sorted(int(v) for v in found.frequent),
        "light_pairs": found.light_pairs,
        "heavy_pairs": found.heavy_pairs,
    }
    if X.n * Y.n <= context.defaults.get('bench', 'exact_limit') ** 2:
        expected = {tuple(int(v) for v in p) for p in level_sets(X, Y, config.eps).prefix(found.t)}
        result["complete"] = expected == set(found.pairs)
        result["sound"] = set(found.pairs) <= expected
        _, heavy = classify_vertices(X, Y, found.t, found.z, config.eps,
                                     context.defaults.get('close_pairs', 'heavy_fraction'))
        result["heavy_vertices"] = int(heavy.sum())
    return result, []


def total_variation(counts: np.ndarray, probs: np.ndarray) -> float:
    """TV between empirical counts and a distribution of the same shape."""
    empirical = counts / max(1, counts.sum())
    return 0.5 * float(np.abs(empirical - probs).sum())


@CommandRegistry.register('sample')
def run_sample(config: RunConfig, context: CommandContext) -> Result:
    """
    Draw from lambda for random integer duals on X, Y (already in [1, phi]).
    Reports the first draws, sampler statistics and, for small inputs, the
    TV distance to the explicit table.
    """
    X, Y = _load_pair(config)
    rng = derive_rng(config.seed, 0)
    state = DualState(rng.integers(-8, 9, size=X.n), rng.integers(-8, 9, size=Y.n), chi=0.5)
    n = max(X.n, Y.n)
    S = draw_rounding_set(X.n, config.phi_exp, derive_seed(config.seed, 1), n_y=Y.n,
                          size=min(X.n * Y.n, shatter_size(n, config.phi_exp)))
    rounding = draw_rounding_state(X, Y, config.eps, S)
    eta = 1.0
    sampler = context.timed(
        "build", ArbitrarySampler, rounding, S, state, eta, CpOracleRegistry.get_oracle(config.oracle.value),
        config.phi_exp, derive_rng(config.seed, 2),
        sampler_config=context.defaults.section('sampler'),
        close_pairs_config=context.defaults.section('close_pairs'),
    )
    i, j, sigma = context.timed("sample", sampler.sample, config.samples, derive_rng(config.seed, 3))
    result = {
        "samples": int(i.size),
        "head": [[int(a), int(b), int(s)] for a, b, s in zip(i[:20], j[:20], sigma[:20])],
        "explicit_pairs": int(len(sampler.partition.explicit)),
        "rectangles": len(sampler.partition.rects),
        "stats": sampler.stats.as_dict(),
    }
    if n <= context.defaults.get('bench', 'tv_limit'):
        D, P = round_duals(state).matrices()
        lam = explicit_lambda(eta, rounding.cost_matrix(), D, P)
        side = np.where(sigma > 0, 0, 1)
        counts = np.zeros(lam.shape)
        np.add.at(counts, (i, j, side), 1)
        result["tv"] = total_variation(counts, lam)
    return result, []


def _bench_rows(config: RunConfig, context: CommandContext) -> List[Dict]:
    oracle = CpOracleRegistry.get_oracle(config.oracle.value)
    cp_options = _close_pairs_options(context)
    approx_limit = context.defaults.get('bench', 'approx_limit')
    exact_limit = context.defaults.get('bench', 'exact_limit')
    rows = []
    jobs = [(n, trial) for n in config.sizes for trial in range(config.trials)]
    for n, trial in tqdm(jobs, desc="bench", disable=not config.verbose):
        seed = derive_seed(config.seed, n, trial)
        X, Y = random_instance(n, config.dim, seed, scale=float(10 * n))
        # even coordinates against odd first coordinates keep cross distances >= 1
        shift = np.zeros(config.dim)
        shift[0] = 1.0
        X, Y = PointSet(2.0 * X.points), PointSet(2.0 * Y.points + shift)
        row = {"n": n, "seed": seed, "estimate": np.nan, "exact": np.nan, "ratio": np.nan, "seconds": np.nan}

        start = time.perf_counter()
        find_close_pairs(oracle, X, Y, config.phi_exp, config.eps, derive_seed(seed, 1), **cp_options)
        row["closepairs_seconds"] = time.perf_counter() - start

        if n <= approx_limit:
            start = time.perf_counter()
            estimate = approximate_emd(X, Y, config.eps, config.phi_exp, oracle, seed, config.mode.value,
                                       config.lambda_source.value, context.defaults, config.relax)
            row["seconds"] = time.perf_counter() - start
            row["estimate"] = estimate.value
        if n <= exact_limit:
            row["exact"] = exact_emd(X, Y)
            if n <= approx_limit and row["exact"] > 0:
                row["ratio"] = row["estimate"] / row["exact"]
        rows.append(row)
    return rows


def fitted_exponent(sizes, seconds) -> float:
    """Slope of log(seconds) against log(n)."""
    sizes = np.asarray(sizes, dtype=float)
    seconds = np.asarray(seconds, dtype=float)
    keep = seconds > 0
    if np.unique(sizes[keep]).size < 2:
        return math.nan
    slope, _ = np.polyfit(np.log(sizes[keep]), np.log(seconds[keep]), 1)
    return float(slope)


@CommandRegistry.register('bench')
def run_bench(config: RunConfig, context: CommandContext) -> Result:
    """Accuracy and runtime over generated instances; rows also go to CSV."""
    df = pd.DataFrame(context.timed("bench", _bench_rows, config, context))
    by_size = df.groupby("n")["closepairs_seconds"].median()
    exponent = fitted_exponent(by_size.index.values, by_size.values)
    if not math.isnan(exponent) and exponent > 1.9:
        logger.warning(f"FindClosePairs runtime exponent {exponent:.3f} exceeds 1.9")

    csv_path = None
    if config.out is not None:
        csv_path = Path(config.out).with_suffix(".csv")
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        df.to_csv(csv_path, index=False)
        logger.info(f"Benchmark rows written to {csv_path}")

    ratios = df["ratio"].dropna()
    result = {
        "rows": len(df),
        "closepairs_exponent": exponent,
        "median_ratio": float(ratios.median()) if len(ratios) else None,
        "max_ratio_error": float(np.max(np.maximum(ratios, 1.0 / ratios)) - 1.0) if len(ratios) else None,
        "csv": str(csv_path) if csv_path else None,
    }
    return result, to_builtin(df.to_dict(orient="records"))


# Fast property checks run by `selftest`; each returns a failure message or None.

def _check_one_d(seed: int) -> Optional[str]:
    for k in range(20):
        positions, b = line_instance(int(derive_rng(seed, k).integers(2, 17)), derive_seed(seed, k))
        flow = exact_emd_supply(positions.reshape(-1, 1), SupplyDemand(b)).cost
        line = one_d_emd(positions, b)
        if abs(flow - line) > 1e-9 * max(1.0, line):
            return f"1-D EMD mismatch: {line} vs {flow}"
    return None


def _check_tree_identity(seed: int) -> Optional[str]:
    for k in range(10):
        rng = derive_rng(seed, 100 + k)
        n = int(rng.integers(2, 11))
        pts = rng.integers(1, 64, size=(n, 3)).astype(float)
        T = sample_quadtree(PointSet(pts, 64.0), seed=derive_seed(seed, 200 + k))
        b = rng.integers(-3, 4, size=n)
        b[-1] -= b.sum()
        flow = exact_flow(tree_distance_matrix(T, np.arange(n), np.arange(n)), SupplyDemand(b)).cost
        tree = tree_emd(T, np.maximum(b, 0), np.maximum(-b, 0))
        if abs(flow - tree) > 1e-9 * max(1.0, tree):
            return f"Tree EMD mismatch: {tree} vs {flow}"
    return None


def _check_partition(seed: int) -> Optional[str]:
    for k in range(5):
        rng = derive_rng(seed, 300 + k)
        state = DualState(rng.integers(-4, 5, size=16), rng.integers(-4, 5, size=16), chi=0.5)
        partition = partition_rectangles(state)
        if not np.all(partition.cover_counts() == 1):
            return "Rectangle partition does not cover every pair exactly once"
        codes = round_duals(state).code_matrix()
        for rect in partition.rects:
            if np.unique(codes[np.ix_(rect.rows, rect.cols)]).size != 1:
                return "Rectangle with more than one dual level"
    return None


def _check_approx(seed: int, defaults: SolverDefaultsManager) -> Optional[str]:
    X = PointSet(np.array([[0.0, 0.0], [10.0, 0.0]]))
    Y = PointSet(np.array([[1.0, 0.0], [12.0, 0.0]]))
    exact = exact_emd(X, Y)
    estimate = approximate_emd(X, Y, 0.25, 0.5, "brute", seed, "practical", "explicit", defaults).value
    if not (exact / 2.25 <= estimate <= 2.25 * exact):
        return f"Two-pair estimate {estimate} far from exact {exact}"
    return None


@CommandRegistry.register('selftest')
def run_selftest(config: RunConfig, context: CommandContext) -> Result:
    """Run the fast property checks; any failure raises SelfTestError."""
    checks = {
        "one_d_emd": lambda: _check_one_d(config.seed),
        "tree_identity": lambda: _check_tree_identity(config.seed),
        "partition": lambda: _check_partition(config.seed),
        "approx_two_pairs": lambda: _check_approx(config.seed, context.defaults),
    }
    outcomes = {}
    for name, check in checks.items():
        message = context.timed(name, check)
        outcomes[name] = "ok" if message is None else message
        logger.info(f"Selftest {name}: {outcomes[name]}")
    failed = [name for name, status in outcomes.items() if status != "ok"]
    if failed:
        raise SelfTestError(f"Selftest failed: {failed}")
    return {"checks": outcomes}, []


def run_command(config: RunConfig, defaults: Optional[SolverDefaultsManager] = None,
                progress: Optional[ProgressLogger] = None) -> Tuple[int, RunReport]:
    """
    Run one command.

    Returns:
        (exit code, report); on error the report's result holds the error object
    """
    context = CommandContext(defaults=defaults or SolverDefaultsManager(config.config_file), progress=progress)
    command = CommandRegistry.get_command(config.command.value)
    start = time.perf_counter()
    config_dump = config.model_dump(mode="json")
    config_dump["defaults"] = context.defaults.get_configuration_info()
    try:
        result, diagnostics = command(config, context)
        exit_code = 0
    except EmdApproxError as e:
        logger.error(f"{type(e).__name__}: {e}")
        result, diagnostics = {"error": e.to_dict()}, []
        exit_code = e.exit_code
    context.timings["total"] = time.perf_counter() - start

    report = RunReport(
        command=config.command,
        config=config_dump,
        result=result,
        diagnostics=diagnostics,
        timings=context.timings if config.timings else {},
    )
    return exit_code, report

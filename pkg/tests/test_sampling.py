import numpy as np
import pytest
from scipy.special import softmax
from scipy.stats import chisquare

from emdapprox.closepairs import BruteCpOracle
from emdapprox.closepairs.close_pairs import ClosePairsResult
from emdapprox.core.exceptions import InputError, SamplerStallError
from emdapprox.geometry.rounding import draw_rounding_state, level_sets
from emdapprox.oracles.exact import explicit_lambda
from emdapprox.sampling import (
    ArbitrarySampler,
    ConstantSampler,
    DualState,
    ExplicitLambdaSource,
    SampledLambdaSource,
    TableSampler,
    constant_sampler,
    decode_level,
    draw_rounding_set,
    estimate_log_weight_sum,
    estimate_weight_sum,
    partition_rectangles,
    round_duals,
    rounded_level,
    shatter_check,
    shatter_size,
    shatter_threshold,
)


def _random_state(n, seed, chi=0.5, low=-8, high=8):
    rng = np.random.default_rng(seed)
    return DualState(rng.integers(low, high + 1, size=n), rng.integers(low, high + 1, size=n), chi)


def _counts(i, j, sigma, n_x, n_y):
    counts = np.zeros((n_x, n_y, 2))
    np.add.at(counts, (i, j, (sigma < 0).astype(int)), 1)
    return counts


def _tv(counts, probs):
    return 0.5 * np.abs(counts / counts.sum() - probs).sum()


def test_rounded_level_brackets_differences():
    chi = 0.5
    diff = np.array([-37.0, -1.0, 0.0, 1.0, 2.0, 7.5, 1e6])
    D, P = decode_level(rounded_level(diff, chi), chi)
    assert D[2] == 0.0 and P[2] == 1
    nonzero = diff != 0
    assert np.all(D[nonzero] <= np.abs(diff[nonzero]) * (1 + 1e-12))
    assert np.all(np.abs(diff[nonzero]) < (1 + chi) * D[nonzero])
    np.testing.assert_array_equal(P[nonzero], np.sign(diff[nonzero]))


def test_dual_state_validation():
    with pytest.raises(InputError):
        DualState(np.array([0.5]), np.array([0]), 0.5)
    with pytest.raises(InputError):
        DualState.zeros(2, 2, chi=0.0)
    state = DualState.zeros(3, 2, chi=0.5, unit=0.25)
    assert (state.n_x, state.n_y) == (3, 2)
    assert round_duals(state).D(0, 1) == 0.0
    assert round_duals(state).P(0, 1) == 1


def test_rounded_duals_use_the_unit():
    state = DualState(np.array([4]), np.array([0]), chi=0.5, unit=0.5)
    # difference 2.0 sits on the level 1.5^1 = 1.5
    assert round_duals(state).D(0, 0) == pytest.approx(1.5)


@pytest.mark.parametrize("seed", range(20))
def test_partition_is_an_exact_d_constant_cover(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 65))
    state = _random_state(n, seed)
    part = partition_rectangles(state)
    np.testing.assert_array_equal(part.cover_counts(), np.ones((n, n), dtype=np.int64))
    codes = round_duals(state).code_matrix()
    for rect in part.rects:
        assert np.all(codes[np.ix_(rect.rows, rect.cols)] == rect.code)
        assert rect.rows.size == rect.cols.size == part.side
    assert len(part.explicit) <= 8 * n ** 1.75


def test_partition_of_equal_duals_is_mostly_squares():
    n = 64
    part = partition_rectangles(DualState.zeros(n, n, chi=0.5))
    assert part.side == 3 and part.band == 8
    assert len(part.rects) == 21 * 21
    assert len(part.explicit) == n * n - 63 * 63
    assert all(rect.D == 0.0 and rect.kappa == 0.0 for rect in part.rects)


def test_partition_of_constant_gap():
    state = DualState(np.full(16, 5), np.zeros(16, dtype=int), chi=0.5)
    part = partition_rectangles(state)
    assert len(part.rects) == 64
    assert len(part.explicit) == 0
    assert all(rect.P == 1 and rect.D == pytest.approx(1.5 ** 3) for rect in part.rects)


def test_shatter_sizes():
    assert shatter_size(16, 0.5) == round(16 ** 1.9375)
    assert shatter_size(4, 0.0) == 16
    assert 64 <= shatter_threshold(16, 1.0) <= 65


def test_draw_rounding_set_is_sorted_and_unique():
    S = draw_rounding_set(20, 0.5, seed=1, n_y=10, size=50)
    assert len(S) == 50
    assert np.all(np.diff(S.codes) > 0)
    assert S.codes.max() < 200
    i, j = S.pairs().T
    assert S.contains(i, j).all()
    assert len(draw_rounding_set(5, 0.5, size=100)) == 25
    assert len(draw_rounding_set(5, 0.5, size=0)) == 0
    with pytest.raises(InputError):
        draw_rounding_set(5, 0.5, size=-1)


def test_rounding_set_shatters_row_bands():
    n, phi_exp = 64, 0.5
    tau = shatter_threshold(n, phi_exp)
    for seed in range(20):
        S = draw_rounding_set(n, phi_exp, seed=seed)
        assert len(S) == shatter_size(n, phi_exp)
        assert shatter_check(S, [16 * n] * 4, lambda codes: codes // n // 16, tau)


def _adversarial_partitions(n, count, seed):
    """Labels over the n*n pair codes: permuted row and column bands, blocks, random and fine cells."""
    rng = np.random.default_rng(seed)
    rows, cols = np.divmod(np.arange(n * n), n)
    makers = [
        lambda: (rng.permutation(n) // (n // 8))[rows],
        lambda: (rng.permutation(n) // (n // 8))[cols],
        lambda: (rng.permutation(n) // (n // 4))[rows] * 2 + (rng.permutation(n) // (n // 2))[cols],
        lambda: rng.integers(0, 8, size=n * n),
        lambda: rng.integers(0, 11, size=n * n),
    ]
    return [makers[k % len(makers)]() for k in range(count)]


def test_rounding_set_shatters_adversarial_partitions():
    n, phi_exp = 64, 0.5
    tau = shatter_threshold(n, phi_exp)
    partitions = _adversarial_partitions(n, 100, seed=99)
    checked = shattered = 0
    for seed in range(20):
        S = draw_rounding_set(n, phi_exp, seed=seed)
        for labels in partitions:
            sizes = np.bincount(labels)
            assert sizes.max() >= tau
            checked += 1
            shattered += shatter_check(S, sizes, lambda codes: labels[codes], tau)
    assert shattered >= 0.99 * checked


def test_shatter_check_detects_a_skewed_set():
    n = 32
    S = draw_rounding_set(n, 0.5, seed=0)
    skewed = type(S)(n, n, S.codes[S.codes < n * n // 2])
    membership = lambda codes: codes // n // 16
    assert not shatter_check(skewed, [16 * n, 16 * n], membership, 100)
    # cells below tau are never checked
    assert shatter_check(skewed, [16 * n, 16 * n], membership, 10 ** 6)


def test_estimator_within_ten_percent():
    rng = np.random.default_rng(0)
    log_w = rng.uniform(0.0, 1.0, size=1000)
    truth = np.exp(log_w).sum()
    sampler = TableSampler(log_w)
    good = 0
    for trial in range(200):
        estimate = estimate_weight_sum(sampler, 0.1, seed=trial)
        good += abs(estimate / truth - 1) <= 0.1
    assert good >= 190


def test_estimator_in_log_space_handles_huge_weights():
    log_w = np.linspace(2000.0, 2001.0, 100)
    sampler = TableSampler(log_w)
    estimate = estimate_log_weight_sum(sampler, 0.05, seed=1)
    assert estimate == pytest.approx(sampler.log_total, abs=0.05)


def test_estimator_rejects_bad_precision():
    with pytest.raises(InputError):
        estimate_weight_sum(TableSampler([0.0]), 0.0)
    with pytest.raises(InputError):
        TableSampler([])


def _rectangle_setup(separated, n=16, seed=0, eps=0.25):
    X, Y = separated(n, 2, seed, scale=10)
    S = draw_rounding_set(n, 0.5, seed=seed)
    rounding = draw_rounding_state(X, Y, eps, S)
    sets = level_sets(X, Y, eps)
    t = sets.min_level + 2
    pairs = frozenset((int(i), int(j)) for i, j in sets.prefix(t))
    prefix = ClosePairsResult(t=t, pairs=pairs, counters=np.zeros(2 * n, dtype=np.int64),
                              frequent=np.zeros(0, dtype=np.int64), z=1.0)
    return rounding, S, prefix


@pytest.mark.parametrize("kappa", [3.0, -2.0, 0.0])
def test_constant_sampler_matches_lambda(separated, kappa):
    n, eta = 16, 1.0
    rounding, S, prefix = _rectangle_setup(separated)
    rows = cols = np.arange(n)
    sampler = ConstantSampler(rows, cols, rounding, kappa, eta, prefix, s_local=S.pairs(), seed=1)
    i, j, sigma = sampler.sample(200_000, np.random.default_rng(2))
    assert set(np.unique(sigma)) <= {-1, 1}
    C = rounding.cost_matrix()
    logits = np.stack([eta * kappa / C, -eta * kappa / C], axis=-1)
    probs = softmax(logits.ravel()).reshape(logits.shape)
    assert _tv(_counts(i, j, sigma, n, n), probs) <= 0.03
    assert sampler.stats.accepted == 200_000


def test_constant_sampler_returns_global_indices(separated):
    rounding, S, prefix = _rectangle_setup(separated)
    rows, cols = np.array([3, 5, 7]), np.array([0, 2])
    local = ClosePairsResult(t=prefix.t, pairs=frozenset(), counters=np.zeros(5, dtype=np.int64),
                             frequent=np.zeros(0, dtype=np.int64), z=1.0)
    i, j, sigma = constant_sampler(rows, cols, rounding, 1.0, 0.5, local, 500, seed=4)
    assert set(i) <= {3, 5, 7}
    assert set(j) <= {0, 2}
    assert i.size == j.size == sigma.size == 500


def test_constant_sampler_stalls_on_a_tiny_budget(separated):
    rounding, S, prefix = _rectangle_setup(separated)
    sampler = ConstantSampler(np.arange(16), np.arange(16), rounding, 2.0, 1.0, prefix,
                              attempt_budget_factor=1e-9)
    with pytest.raises(SamplerStallError) as info:
        sampler.sample(100, np.random.default_rng(0))
    assert info.value.to_dict()["budget"] == 164


def test_constant_sampler_rejects_empty_rectangle(separated):
    rounding, S, prefix = _rectangle_setup(separated)
    with pytest.raises(InputError):
        ConstantSampler(np.arange(0), np.arange(3), rounding, 1.0, 1.0, prefix)


def _arbitrary_setup(separated, n, seed, eps=0.25):
    X, Y = separated(n, 2, seed, scale=10)
    S = draw_rounding_set(n, 0.5, seed=seed)
    rounding = draw_rounding_state(X, Y, eps, S)
    return rounding, S


def _two_scale_state(n, seed, chi=0.5):
    rng = np.random.default_rng(seed)
    far = 16 * (np.arange(n) < n // 2)
    return DualState(rng.integers(0, 2, size=n) + far, rng.integers(0, 2, size=n) + rng.permutation(far), chi)


def _state(kind, n, seed):
    if kind == "zero":
        return DualState.zeros(n, n, chi=0.5)
    if kind == "two_scale":
        return _two_scale_state(n, seed)
    return _random_state(n, seed)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(3))
@pytest.mark.parametrize("kind", ["zero", "random", "two_scale"])
def test_arbitrary_sampler_matches_lambda(separated, seed, kind):
    n, eta = 16, 0.5
    rounding, S = _arbitrary_setup(separated, n, seed)
    state = _state(kind, n, seed)
    sampler = ArbitrarySampler(rounding, S, state, eta, BruteCpOracle(), 0.5, seed=seed)
    i, j, sigma = sampler.sample(200_000, np.random.default_rng(seed + 10))
    D, P = round_duals(state).matrices()
    probs = explicit_lambda(eta, rounding.cost_matrix(), D, P)
    assert _tv(_counts(i, j, sigma, n, n), probs) <= 0.03


def test_arbitrary_sampler_is_uniform_at_zero_duals(separated):
    n = 16
    rounding, S = _arbitrary_setup(separated, n, 4)
    sampler = ArbitrarySampler(rounding, S, DualState.zeros(n, n, chi=0.5), 0.5, BruteCpOracle(), 0.5, seed=4)
    assert len(sampler.partition.rects) > 0
    i, j, sigma = sampler.sample(200_000, np.random.default_rng(14))
    counts = _counts(i, j, sigma, n, n).ravel()
    assert chisquare(counts).pvalue >= 0.01


def test_arbitrary_sampler_sampling_estimator_matches_lambda(separated):
    n, eta = 16, 0.5
    rounding, S = _arbitrary_setup(separated, n, 6)
    alpha = np.repeat([0, 1], n // 2)
    state = DualState(alpha, np.random.default_rng(6).permutation(alpha), chi=0.5)
    config = {"weight_estimator": "sampling", "volume_constant": 1.0}
    estimated = ArbitrarySampler(rounding, S, state, eta, BruteCpOracle(), 0.5, seed=6, sampler_config=config)
    exact = ArbitrarySampler(rounding, S, state, eta, BruteCpOracle(), 0.5, seed=6)
    assert len(estimated.partition.rects) > 0
    assert not np.array_equal(estimated.log_volumes, exact.log_volumes)
    np.testing.assert_allclose(estimated.log_volumes, exact.log_volumes, atol=0.05)

    i, j, sigma = estimated.sample(200_000, np.random.default_rng(16))
    D, P = round_duals(state).matrices()
    probs = explicit_lambda(eta, rounding.cost_matrix(), D, P)
    assert _tv(_counts(i, j, sigma, n, n), probs) <= 0.04


@pytest.mark.slow
def test_arbitrary_sampler_uses_close_pairs_on_larger_squares(separated):
    n, eta = 64, 0.5
    rounding, S = _arbitrary_setup(separated, n, 7)
    alpha = np.repeat([0, 1], n // 2)
    state = DualState(alpha, np.random.default_rng(7).permutation(alpha), chi=0.5)
    sampler = ArbitrarySampler(rounding, S, state, eta, BruteCpOracle(), 0.5, seed=7)
    assert sampler.partition.side > 2
    i, j, sigma = sampler.sample(100_000, np.random.default_rng(17))

    prefixes = sampler.prefixes.values()
    assert prefixes
    assert all(p.z > 1.0 for p in prefixes)
    assert any(p.light_iterations > 0 for p in prefixes)
    assert sampler.stats.attempts >= sampler.stats.accepted > 0

    D, P = round_duals(state).matrices()
    probs = explicit_lambda(eta, rounding.cost_matrix(), D, P)
    counts = _counts(i, j, sigma, n, n)
    assert _tv(counts.sum(axis=(1, 2)), probs.sum(axis=(1, 2))) <= 0.03
    assert _tv(counts.sum(axis=(0, 2)), probs.sum(axis=(0, 2))) <= 0.03


def test_arbitrary_sampler_volumes_cover_all_parts(separated):
    n = 16
    rounding, S = _arbitrary_setup(separated, n, 5)
    sampler = ArbitrarySampler(rounding, S, _random_state(n, 5), 0.5, BruteCpOracle(), 0.5, seed=0)
    assert sampler.log_volumes.size == 1 + len(sampler.partition.rects)
    i, j, sigma = sampler.sample(1000, np.random.default_rng(0))
    assert i.size == 1000
    assert sampler.stats.accepted <= 1000


def test_explicit_source_zero_duals_have_no_divergence(separated):
    n = 8
    rounding, _ = _arbitrary_setup(separated, n, 1)
    g_x, g_y, info = ExplicitLambdaSource(rounding, 1.0).flow_divergence(
        DualState.zeros(n, n, chi=0.5), np.random.default_rng(0))
    np.testing.assert_allclose(g_x, 0.0, atol=1e-15)
    np.testing.assert_allclose(g_y, 0.0, atol=1e-15)
    assert info == {"samples": 0}


def test_explicit_source_matches_table(separated):
    n = 8
    rounding, _ = _arbitrary_setup(separated, n, 2)
    state = _random_state(n, 2)
    source = ExplicitLambdaSource(rounding, 0.5)
    lam = source.table(state)
    g_x, g_y, _ = source.flow_divergence(state, np.random.default_rng(0))
    C = rounding.cost_matrix()
    expected = ((lam[..., 0] - lam[..., 1]) / C)
    np.testing.assert_allclose(g_x, expected.sum(axis=1))
    np.testing.assert_allclose(g_y, expected.sum(axis=0))
    assert g_x.sum() == pytest.approx(g_y.sum())


def test_sampled_source_tracks_explicit(separated):
    n = 8
    rounding, S = _arbitrary_setup(separated, n, 3)
    state = _random_state(n, 3)
    explicit = ExplicitLambdaSource(rounding, 0.5)
    sampled = SampledLambdaSource(rounding, 0.5, S, BruteCpOracle(), samples=100_000)
    g_x, g_y, _ = explicit.flow_divergence(state, np.random.default_rng(0))
    s_x, s_y, info = sampled.flow_divergence(state, np.random.default_rng(1))
    np.testing.assert_allclose(s_x, g_x, atol=0.02)
    np.testing.assert_allclose(s_y, g_y, atol=0.02)
    assert info["samples"] == 100_000
    assert {"explicit_pairs", "rectangles", "attempts"} <= set(info)

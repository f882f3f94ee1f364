import numpy as np
import pytest

from emdapprox.closepairs import BruteCpOracle
from emdapprox.core.exceptions import InputError
from emdapprox.geometry.points import PointSet
from emdapprox.oracles.exact import exact_emd
from emdapprox.solver import approximate_emd, choose_source
from emdapprox.utils.synthetic import random_instance


def test_identical_sets_cost_nothing(defaults):
    X = np.array([[1.0, 2.0], [3.0, 4.0]])
    estimate = approximate_emd(X, X[::-1], defaults=defaults)
    assert estimate.value == 0.0
    assert estimate.parts == []


def test_single_pair_after_cancellation(defaults):
    X = np.array([[0.0, 0.0], [5.0, 5.0]])
    Y = np.array([[5.0, 5.0], [2.0, 3.0]])
    assert approximate_emd(X, Y, defaults=defaults).value == 5.0


def test_two_pairs_are_close(defaults):
    X = PointSet(np.array([[0.0, 0.0], [10.0, 0.0]]))
    Y = PointSet(np.array([[1.0, 0.0], [12.0, 0.0]]))
    estimate = approximate_emd(X, Y, 0.25, 0.5, "brute", 0, "practical", "explicit", defaults)
    assert 3.0 / 2.25 <= estimate.value <= 2.25 * 3.0


@pytest.mark.parametrize("kwargs", [
    {"eps": 0.5}, {"eps": 0.0}, {"phi_exp": 1.0}, {"phi_exp": 0.0},
    {"lambda_source": "table"}, {"oracle": "lsh"},
])
def test_approximate_emd_rejects_bad_arguments(defaults, small_pair, kwargs):
    X, Y = small_pair
    with pytest.raises(InputError):
        approximate_emd(X, Y, defaults=defaults, **kwargs)


def test_approximate_emd_size_mismatch(defaults):
    with pytest.raises(InputError):
        approximate_emd(np.zeros((2, 2)), np.ones((3, 2)), defaults=defaults)


def test_choose_source():
    assert choose_source("auto", 10, 64) == "explicit"
    assert choose_source("auto", 65, 64) == "sampler"
    assert choose_source("sampler", 4, 64) == "sampler"
    with pytest.raises(InputError):
        choose_source("dense", 4, 64)


def test_parts_report_their_search(defaults, small_pair):
    X, Y = small_pair
    estimate = approximate_emd(X, Y, 0.25, 0.5, BruteCpOracle(), seed=3, defaults=defaults)
    assert estimate.value > 0
    assert estimate.value == pytest.approx(sum(p.estimate for p in estimate.parts))
    searched = [p for p in estimate.parts if p.search is not None]
    for part in searched:
        summary = part.summary()
        assert summary["lambda_source"] == "explicit"
        assert summary["t_star"] == part.search.t_star
        assert 0 <= summary["k_star"] <= summary["k_max"]
        assert part.d_l > 0 and part.d_u >= part.d_l
    assert len(estimate.params) == len(searched)
    assert all(record["part"] < len(estimate.parts) for record in estimate.diagnostics)


def test_same_seed_same_estimate(defaults, small_pair):
    X, Y = small_pair
    first = approximate_emd(X, Y, seed=11, defaults=defaults).value
    second = approximate_emd(X, Y, seed=11, defaults=defaults).value
    assert first == second


@pytest.mark.slow
def test_sampler_source_on_a_small_instance(defaults):
    defaults.set_user_overrides({"practical": {"max_rounds": 60}})
    good = 0
    for seed in range(3):
        X, Y = random_instance(16, 4, seed)
        exact = exact_emd(X, Y)
        estimate = approximate_emd(X, Y, 0.25, 0.5, "brute", seed, "practical", "sampler", defaults)
        assert all(p.lambda_source in (None, "sampler") for p in estimate.parts)
        assert estimate.value > 0
        good += exact / 2.25 <= estimate.value <= 2.25 * exact
    assert good >= 2


@pytest.mark.slow
def test_pipeline_acceptance(defaults):
    trials = 50
    good = 0
    for seed in range(trials):
        X, Y = random_instance(32, 4, seed)
        exact = exact_emd(X, Y)
        value = approximate_emd(X, Y, 0.25, 0.5, "brute", seed, defaults=defaults).value
        good += exact / 2.25 <= value <= 2.25 * exact
    assert good >= 0.9 * trials

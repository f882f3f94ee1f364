import itertools

import numpy as np
import pytest

from emdapprox.core.exceptions import InputError
from emdapprox.geometry.points import PointSet, SupplyDemand, pairwise_l1
from emdapprox.oracles.assignment import hungarian
from emdapprox.oracles.exact import (
    brute_closest_pair,
    exact_emd,
    exact_emd_supply,
    exact_flow,
    explicit_lambda,
    one_d_emd,
)
from emdapprox.utils.synthetic import line_instance


def _brute_matching(cost):
    n = cost.shape[0]
    return min(sum(cost[i, p[i]] for i in range(n)) for p in itertools.permutations(range(n)))


@pytest.mark.parametrize("seed", range(5))
def test_hungarian_matches_permutations(seed):
    rng = np.random.default_rng(seed)
    cost = rng.integers(0, 20, size=(6, 6)).astype(float)
    col, total = hungarian(cost)
    assert sorted(col) == list(range(6))
    assert total == pytest.approx(_brute_matching(cost))


def test_hungarian_rectangular_both_ways():
    cost = np.array([[4.0, 1.0, 6.0], [2.0, 0.0, 5.0]])
    col, total = hungarian(cost)
    assert total == 3.0
    assert list(col) == [1, 0]
    rows, total_t = hungarian(cost.T)
    assert total_t == 3.0
    assert rows[1] == 0 and rows[0] == 1 and rows[2] == -1


def test_exact_emd_small(small_pair):
    X, Y = small_pair
    assert exact_emd(X, Y) == pytest.approx(_brute_matching(pairwise_l1(X.points, Y.points)))


def test_exact_emd_size_mismatch():
    with pytest.raises(InputError):
        exact_emd(np.zeros((2, 2)), np.zeros((3, 2)))


def test_exact_emd_empty():
    assert exact_emd(np.zeros((0, 3)), np.zeros((0, 3))) == 0.0


def test_exact_flow_plan_is_feasible():
    X = np.array([[0.0], [1.0], [5.0], [6.0]])
    b = SupplyDemand(np.array([2, -1, 1, -2]))
    solution = exact_emd_supply(X, b)
    out = {0: 0, 2: 0}
    into = {1: 0, 3: 0}
    for (src, snk), mass in solution.flow.items():
        out[src] += mass
        into[snk] += mass
    assert out == {0: 2, 2: 1}
    assert into == {1: 1, 3: 2}
    # 0->1 (1), 0->3 (6), 2->3 (1)
    assert solution.cost == pytest.approx(8.0)


def test_exact_flow_shape_check():
    with pytest.raises(InputError):
        exact_flow(np.zeros((2, 3)), np.array([1, -1]))


def test_one_d_emd_unsorted_is_error():
    with pytest.raises(InputError):
        one_d_emd([3.0, 1.0], [1, -1])


def test_one_d_emd_matches_flow_on_random_lines():
    for seed in range(200):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 33))
        positions, b = line_instance(n, seed)
        flow = exact_emd_supply(positions.reshape(-1, 1), SupplyDemand(b)).cost
        assert one_d_emd(positions, b) == pytest.approx(flow, rel=1e-9, abs=1e-9)


def test_brute_closest_pair_ties_lexicographic():
    A = np.array([[0.0], [10.0]])
    B = np.array([[1.0], [11.0]])
    assert brute_closest_pair(A, B) == (0, 0, 1.0)
    with pytest.raises(InputError):
        brute_closest_pair(np.zeros((0, 1)), B)


def test_explicit_lambda_normalised_and_signed():
    C = np.array([[1.0, 2.0], [4.0, 1.0]])
    D = np.array([[1.0, 0.0], [2.0, 1.0]])
    P = np.array([[1, 1], [-1, 1]])
    lam = explicit_lambda(0.5, C, D, P)
    assert lam.shape == (2, 2, 2)
    assert lam.sum() == pytest.approx(1.0)
    # sign +1 is heavier where P*D > 0
    assert lam[0, 0, 0] > lam[0, 0, 1]
    assert lam[1, 0, 0] < lam[1, 0, 1]
    assert lam[0, 1, 0] == pytest.approx(lam[0, 1, 1])


def test_explicit_lambda_large_exponents_stay_finite():
    C = np.ones((2, 2))
    D = np.full((2, 2), 1e4)
    P = np.ones((2, 2))
    lam = explicit_lambda(1.0, C, D, P)
    assert np.all(np.isfinite(lam))
    assert lam[..., 0].sum() == pytest.approx(1.0)


def test_explicit_lambda_rejects_bad_costs():
    with pytest.raises(InputError):
        explicit_lambda(1.0, np.zeros((1, 1)), np.zeros((1, 1)), np.zeros((1, 1)))


def test_exact_emd_supply_on_pointset_equals_matching(small_pair):
    X, Y = small_pair
    P = PointSet(np.vstack([X.points, Y.points]))
    b = np.concatenate([np.ones(X.n, dtype=int), -np.ones(Y.n, dtype=int)])
    assert exact_emd_supply(P, b).cost == pytest.approx(exact_emd(X, Y))

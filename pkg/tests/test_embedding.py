import math

import numpy as np
import pytest

from emdapprox.core.exceptions import InputError
from emdapprox.embedding.perturb import embed_and_perturb, measure_distortion
from emdapprox.embedding.quadtree import (
    greedy_tree_bound,
    greedy_tree_matching,
    sample_quadtree,
    tree_depth,
    tree_distance,
    tree_distance_matrix,
    tree_emd,
)
from emdapprox.geometry.points import PointSet, SupplyDemand
from emdapprox.oracles.exact import exact_emd, exact_flow


def _grid_points(seed, n, d=3, phi=64):
    rng = np.random.default_rng(seed)
    return PointSet(rng.integers(1, phi, size=(n, d)).astype(float), float(phi))


def test_tree_depth():
    assert tree_depth(1) == 1
    assert tree_depth(64) == 7
    assert tree_depth(65) == 8


def test_parents_are_consistent():
    T = sample_quadtree(_grid_points(0, 20), seed=1)
    assert T.num_nodes(0) == 1
    for level in range(1, T.depth + 1):
        np.testing.assert_array_equal(T.parents[level][T.node_of[level]], T.node_of[level - 1])


def test_leaves_separate_distinct_integer_points():
    P = _grid_points(2, 30)
    T = sample_quadtree(P, seed=3)
    keys = {tuple(row) for row in P.points}
    assert np.unique(T.leaf_of).size == len(keys)


def test_root_edge_has_no_weight():
    T = sample_quadtree(_grid_points(0, 4), seed=0)
    with pytest.raises(InputError):
        T.edge_weight(0)
    assert T.edge_weight(1) == T.phi


def test_tree_distance_matrix_matches_pairwise():
    T = sample_quadtree(_grid_points(4, 8), seed=5)
    M = tree_distance_matrix(T, np.arange(8), np.arange(8))
    for i in range(8):
        assert M[i, i] == 0.0
        for j in range(8):
            assert M[i, j] == tree_distance(T, i, j) == M[j, i]


def test_tree_emd_equals_flow_under_tree_metric():
    for trial in range(100):
        rng = np.random.default_rng(trial)
        n = int(rng.integers(2, 17))
        T = sample_quadtree(_grid_points(1000 + trial, n), seed=trial)
        b = rng.integers(-3, 4, size=n)
        b[-1] -= b.sum()
        flow = exact_flow(tree_distance_matrix(T, np.arange(n), np.arange(n)), SupplyDemand(b)).cost
        assert tree_emd(T, np.maximum(b, 0), np.maximum(-b, 0)) == pytest.approx(flow, rel=1e-9, abs=1e-9)


def test_tree_emd_mass_mismatch():
    T = sample_quadtree(_grid_points(0, 3), seed=0)
    with pytest.raises(InputError):
        tree_emd(T, np.array([1.0, 0.0, 0.0]), np.array([0.0, 0.0, 2.0]))


def test_greedy_matching_is_tree_optimal():
    for seed in range(10):
        P = _grid_points(seed, 12)
        T = sample_quadtree(P, seed=seed)
        x_idx, y_idx = np.arange(6), np.arange(6, 12)
        matching, total = greedy_tree_matching(T, x_idx, y_idx)
        assert sorted(i for i, _ in matching) == list(x_idx)
        assert sorted(j for _, j in matching) == list(y_idx)
        mu = np.r_[np.ones(6), np.zeros(6)]
        nu = np.r_[np.zeros(6), np.ones(6)]
        assert total == pytest.approx(tree_emd(T, mu, nu))
        assert greedy_tree_bound(T, x_idx, y_idx) == total


def test_tree_dominates_l1_over_dimension():
    P = _grid_points(7, 16, d=3)
    T = sample_quadtree(P, seed=8)
    diff = np.abs(P.points[:, None, :] - P.points[None, :, :]).sum(axis=-1)
    M = tree_distance_matrix(T, np.arange(16), np.arange(16))
    assert np.all(M * 3 >= diff - 1e-9)


def _instance(seed, n=32, d=4):
    rng = np.random.default_rng(seed)
    X = 2 * rng.integers(0, 30, size=(n, d)) + 1
    Y = 2 * rng.integers(0, 30, size=(n, d)) + 1
    Y[:, 0] += 1
    return X.astype(float), Y.astype(float)


def test_perturbation_sandwich():
    eps = 0.3
    upper = 0
    for seed in range(50):
        X, Y = _instance(seed)
        P = PointSet(np.vstack([X, Y]), 128.0)
        instance = embed_and_perturb(P, eps, seed)
        before = exact_emd(X, Y)
        after = exact_emd(instance.Y.points[:32], instance.Y.points[32:])
        assert after >= before - 1e-9
        upper += after <= (1 + eps) * before
    assert upper >= 40


def test_distortion_envelope():
    eps = 0.3
    passing = 0
    for seed in range(25):
        X, Y = _instance(100 + seed)
        P = PointSet(np.vstack([X, Y]), 128.0)
        instance = embed_and_perturb(P, eps, seed)
        low, high = measure_distortion(instance)
        n = P.n
        passing += high <= 64 * math.log(n) * math.log2(128.0) / eps and low >= eps / 64
    assert passing >= 20


def test_perturbed_instance_bounds():
    P = _grid_points(3, 10)
    instance = embed_and_perturb(P, 0.25, seed=1)
    assert instance.Y.d == P.d + instance.d_prime
    np.testing.assert_array_equal(instance.Y.points[:, :P.d], P.points)
    assert instance.d_l == pytest.approx(0.25 / math.log2(64))
    assert instance.distortion == instance.d_u / instance.d_l


def test_embed_needs_phi():
    with pytest.raises(InputError):
        embed_and_perturb(np.zeros((3, 2)), 0.25)

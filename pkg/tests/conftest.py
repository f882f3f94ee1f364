import numpy as np
import pytest

from emdapprox.core.defaults import SolverDefaultsManager
from emdapprox.geometry.points import PointSet


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow acceptance checks")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def defaults(tmp_path):
    """Built-in solver defaults, independent of the repo's YAML file."""
    return SolverDefaultsManager(tmp_path / "missing.yaml")


@pytest.fixture
def small_pair():
    """Two 4-point sets at integer coordinates with cross distances >= 1."""
    X = PointSet(np.array([[1.0, 1.0], [4.0, 2.0], [9.0, 9.0], [2.0, 7.0]]), 32.0)
    Y = PointSet(np.array([[2.0, 1.0], [6.0, 3.0], [8.0, 12.0], [3.0, 9.0]]), 32.0)
    return X, Y


def _separated_instance(n, d, seed, scale=50):
    rng = np.random.default_rng(seed)
    X = 2 * rng.integers(0, scale, size=(n, d))
    Y = 2 * rng.integers(0, scale, size=(n, d))
    Y[:, 0] += 1
    return PointSet(X.astype(float)), PointSet(Y.astype(float))


@pytest.fixture
def separated():
    """Factory for integer instances whose cross distances are all at least 1."""
    return _separated_instance


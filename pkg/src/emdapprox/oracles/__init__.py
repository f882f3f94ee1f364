"""Exact reference computations used as baselines and ground truth."""

from .assignment import hungarian
from .exact import (
    FlowSolution,
    exact_emd,
    exact_emd_supply,
    exact_flow,
    one_d_emd,
    brute_closest_pair,
    explicit_lambda,
)

__all__ = [
    "hungarian",
    "FlowSolution",
    "exact_emd",
    "exact_emd_supply",
    "exact_flow",
    "one_d_emd",
    "brute_closest_pair",
    "explicit_lambda",
]

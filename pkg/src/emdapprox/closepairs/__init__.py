"""Closest-pair oracles and all-close-pairs retrieval."""

from .cp_oracle import (
    CpOracle,
    CpOracleRegistry,
    BruteCpOracle,
    GridCpOracle,
    closest_pair,
    boosted_cp,
    boost_repetitions,
    subs_cp,
)
from .close_pairs import (
    ClosePairsResult,
    last_small_prefix,
    find_close_pairs,
    classify_vertices,
    frequency_estimate,
)

__all__ = [
    "CpOracle",
    "CpOracleRegistry",
    "BruteCpOracle",
    "GridCpOracle",
    "closest_pair",
    "boosted_cp",
    "boost_repetitions",
    "subs_cp",
    "ClosePairsResult",
    "last_small_prefix",
    "find_close_pairs",
    "classify_vertices",
    "frequency_estimate",
]

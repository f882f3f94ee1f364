"""Point sets, supplies, l1 distances and the level structure on pairs."""

from .points import PointSet, SupplyDemand, l1_distance, pairwise_l1, dedup_and_cancel
from .rounding import (
    psi_level,
    psi_levels,
    level_of,
    levels_of,
    floor_log_levels,
    prefix_member,
    prefix_mask,
    level_sets,
    LevelSets,
    RoundingState,
    draw_rounding_state,
    rounded_cost,
)

__all__ = [
    "PointSet",
    "SupplyDemand",
    "l1_distance",
    "pairwise_l1",
    "dedup_and_cancel",
    "psi_level",
    "psi_levels",
    "level_of",
    "levels_of",
    "floor_log_levels",
    "prefix_member",
    "prefix_mask",
    "level_sets",
    "LevelSets",
    "RoundingState",
    "draw_rounding_state",
    "rounded_cost",
]

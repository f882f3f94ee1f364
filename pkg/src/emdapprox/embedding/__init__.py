"""Aspect-ratio reduction, quadtree embedding and perturbation."""

from .aspect_ratio import (
    ReducedPart,
    ReducedInstance,
    rough_estimate,
    grid_partition,
    pad_min_distance,
    pad_dimension,
    reduce_aspect_ratio,
)
from .quadtree import (
    QuadTree,
    sample_quadtree,
    tree_distance,
    tree_distance_matrix,
    tree_emd,
    greedy_tree_matching,
    greedy_tree_bound,
)
from .perturb import PerturbedInstance, embed_and_perturb, measure_distortion

__all__ = [
    "ReducedPart",
    "ReducedInstance",
    "rough_estimate",
    "grid_partition",
    "pad_min_distance",
    "pad_dimension",
    "reduce_aspect_ratio",
    "QuadTree",
    "sample_quadtree",
    "tree_distance",
    "tree_distance_matrix",
    "tree_emd",
    "greedy_tree_matching",
    "greedy_tree_bound",
    "PerturbedInstance",
    "embed_and_perturb",
    "measure_distortion",
]

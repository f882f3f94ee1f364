"""Sampling from the MWU distribution lambda without materialising it."""

from .arbitrary_sampler import ArbitrarySampler, arbitrary_sampler
from .constant_sampler import ConstantSampler, SamplerStats, constant_sampler
from .duals import DualState, RoundedDuals, decode_level, round_duals, rounded_level
from .estimator import ProportionalSampler, TableSampler, estimate_log_weight_sum, estimate_weight_sum
from .partition import Rectangle, RectanglePartition, partition_rectangles
from .shatter import ShatterSet, draw_rounding_set, shatter_check, shatter_size, shatter_threshold
from .sources import ExplicitLambdaSource, LambdaSource, SampledLambdaSource

__all__ = [
    "ArbitrarySampler", "arbitrary_sampler",
    "ConstantSampler", "SamplerStats", "constant_sampler",
    "DualState", "RoundedDuals", "decode_level", "round_duals", "rounded_level",
    "ProportionalSampler", "TableSampler", "estimate_log_weight_sum", "estimate_weight_sum",
    "Rectangle", "RectanglePartition", "partition_rectangles",
    "ShatterSet", "draw_rounding_set", "shatter_check", "shatter_size", "shatter_threshold",
    "ExplicitLambdaSource", "LambdaSource", "SampledLambdaSource",
]

"""
Polytope bound propagation through feed-forward ReLU networks.
"""

from shared.types import BoxBounds

from .relaxation import lower_slope, relu_relaxation
from .bounds import (
    BoundPropagationError,
    BoundResult,
    LayerBounds,
    LinearBounds,
    bounds_graph,
    propagate_bounds,
    upper_bound_gradient,
    upper_bound_value_and_gradient,
)
from .interval import compare_with_interval, interval_bounds

__all__ = [
    "BoxBounds",
    "lower_slope",
    "relu_relaxation",
    "BoundPropagationError",
    "BoundResult",
    "LayerBounds",
    "LinearBounds",
    "bounds_graph",
    "propagate_bounds",
    "upper_bound_gradient",
    "upper_bound_value_and_gradient",
    "compare_with_interval",
    "interval_bounds",
]

"""
Naive interval arithmetic, kept as a reference point for the polytope bounds.
"""

from typing import Tuple

import numpy as np

from ndiff.mlp import MlpParams
from shared.types import BoxBounds
from .bounds import propagate_bounds


def interval_bounds(params: MlpParams, box: BoxBounds) -> Tuple[np.ndarray, np.ndarray]:
    """Center/radius propagation of the box through every layer."""
    center = (box.lower + box.upper) / 2.0
    radius = (box.upper - box.lower) / 2.0
    last = len(params.layers) - 1
    for i, (w, b) in enumerate(params.layers):
        center = center @ w.T + b
        radius = radius @ np.abs(w).T
        if i < last:
            lo = np.maximum(center - radius, 0.0)
            hi = np.maximum(center + radius, 0.0)
            center, radius = (lo + hi) / 2.0, (hi - lo) / 2.0
    lower, upper = center - radius, center + radius
    if params.output_activation == "sigmoid":
        lower = 0.5 * (1.0 + np.tanh(0.5 * lower))
        upper = 0.5 * (1.0 + np.tanh(0.5 * upper))
    return lower, upper


def compare_with_interval(params: MlpParams, box: BoxBounds) -> float:
    """Mean over outputs of polytope width / interval width (1 where both are 0)."""
    poly = propagate_bounds(params, box)
    lo, hi = interval_bounds(params, box)
    poly_width = poly.upper - poly.lower
    ibp_width = hi - lo
    ratio = np.where(ibp_width > 0.0, poly_width / np.where(ibp_width > 0.0, ibp_width, 1.0), 1.0)
    return float(np.mean(ratio))

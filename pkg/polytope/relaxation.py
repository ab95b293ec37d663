"""
Linear relaxation of ReLU over a pre-activation interval [l, u].

    l >= 0          -> lower slope 1, upper line h          (active)
    u <= 0          -> lower slope 0, upper line 0          (inactive)
    l < 0 < u       -> lower slope alpha in {0, 1}, alpha = 1 iff u >= |l|
                       upper line u/(u-l) * h - u*l/(u-l)
"""

from typing import Tuple

import numpy as np

from ndiff import graph as G
from ndiff.graph import Tensor


def _modes(l: np.ndarray, u: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    inactive = u <= 0.0
    active = (l >= 0.0) & ~inactive
    unstable = ~(inactive | active)
    return active, inactive, unstable


def lower_slope(l: np.ndarray, u: np.ndarray) -> np.ndarray:
    active, _, unstable = _modes(l, u)
    return np.where(active | (unstable & (u >= np.abs(l))), 1.0, 0.0)


def relax_graph(l: Tensor, u: Tensor) -> Tuple[np.ndarray, Tensor, Tensor]:
    """(alpha, upper slope, upper intercept) with slope/intercept on the tape.

    alpha and the mode selection are piecewise constant and carry no gradient.
    """
    lv, uv = l.value, u.value
    active, _, unstable = _modes(lv, uv)
    alpha = lower_slope(lv, uv)
    denom = G.where(unstable, G.sub(u, l), 1.0)
    ratio = G.mul(u, G.reciprocal(denom))
    slope = G.where(unstable, ratio, active.astype(np.float64))
    intercept = G.where(unstable, G.neg(G.mul(ratio, l)), 0.0)
    return alpha, slope, intercept


def relu_relaxation(l, u) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Numeric (alpha, slope, intercept) for scalars or arrays with l <= u."""
    l = np.asarray(l, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    if np.any(l > u):
        raise ValueError("relu_relaxation requires l <= u")
    alpha, slope, intercept = relax_graph(G.constant(l), G.constant(u))
    return alpha, slope.value, intercept.value

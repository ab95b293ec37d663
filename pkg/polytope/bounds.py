"""
Backward linear bound propagation (polytope domain).

For an input box [x_lo, x_hi] every pre-activation h_k is bounded by walking
a linear expression ``Lambda h_k`` back to the input, replacing each ReLU by
its relaxation. A positive coefficient takes the upper line of the neuron
when bounding from above and the lower line when bounding from below; a
negative coefficient does the opposite. The resulting hyperplanes are
concretized over the box with the same sign split.

Intermediate bounds are computed front to back with the full backward
recursion, then intersected with the interval image of the previous layer.
Everything runs on the ndiff tape so the concretized bounds can be
differentiated with respect to concrete input coordinates.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np

from ndiff import graph as G
from ndiff.graph import Tensor
from ndiff.mlp import MlpParams
from shared.types import BoxBounds
from .relaxation import relax_graph


logger = logging.getLogger(__name__)


class BoundPropagationError(ValueError):
    """Box and network dimensions disagree, or a concrete dim has width."""
    pass


@dataclass(frozen=True)
class LinearBounds:
    """A_lower x + b_lower <= N(x) <= A_upper x + b_upper on the box (pre output activation)."""

    a_lower: np.ndarray
    b_lower: np.ndarray
    a_upper: np.ndarray
    b_upper: np.ndarray

    def evaluate(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=np.float64)
        lower = np.einsum("...oi,...i->...o", self.a_lower, x) + self.b_lower
        upper = np.einsum("...oi,...i->...o", self.a_upper, x) + self.b_upper
        return lower, upper


@dataclass(frozen=True)
class LayerBounds:
    """Pre-activation bounds of every hidden layer."""

    lower: Tuple[np.ndarray, ...]
    upper: Tuple[np.ndarray, ...]


@dataclass(frozen=True)
class BoundResult:
    lower: np.ndarray
    upper: np.ndarray
    linear: LinearBounds
    layers: LayerBounds


def _expand(t, axis: int = -2):
    return G.expand_dims(t, axis) if isinstance(t, Tensor) else np.expand_dims(t, axis)


def _interval_affine(w: Tensor, b: Tensor, lo: Tensor, hi: Tensor) -> Tuple[Tensor, Tensor]:
    """Interval image of ``W g + b`` for g in [lo, hi]."""
    wt_pos = G.transpose(G.positive_part(w))
    wt_neg = G.transpose(G.negative_part(w))
    upper = G.add(G.add(G.matmul(hi, wt_pos), G.matmul(lo, wt_neg)), b)
    lower = G.add(G.add(G.matmul(lo, wt_pos), G.matmul(hi, wt_neg)), b)
    return lower, upper


def _concretize(a: Tensor, c: Tensor, lo: Tensor, hi: Tensor, upper: bool) -> Tensor:
    pos = G.positive_part(a)
    neg = G.negative_part(a)
    lo_e, hi_e = _expand(lo), _expand(hi)
    if upper:
        spread = G.add(G.mul(pos, hi_e), G.mul(neg, lo_e))
    else:
        spread = G.add(G.mul(pos, lo_e), G.mul(neg, hi_e))
    return G.add(G.sum_(spread, axis=-1), c)


def _backsubstitute(
    weights: Sequence[Tuple[Tensor, Tensor]],
    relaxations: Sequence[Tuple[np.ndarray, Tensor, Tensor]],
    layer: int,
    rows: Optional[Sequence[int]],
    upper: bool,
) -> Tuple[Tensor, Tensor]:
    """Coefficients (A, c) with  N_layer[rows](x) <= A x + c  (or >= for the lower side)."""
    w, b = weights[layer]
    if rows is not None:
        w, b = G.take(w, list(rows)), G.take(b, list(rows))
    a, c = w, b
    for j in range(layer - 1, -1, -1):
        alpha, slope, intercept = relaxations[j]
        pos, neg = G.positive_part(a), G.negative_part(a)
        slope_e, alpha_e = _expand(slope), _expand(alpha)
        if upper:
            coeff = G.add(G.mul(pos, slope_e), G.mul(neg, alpha_e))
            c = G.add(c, G.sum_(G.mul(pos, _expand(intercept)), axis=-1))
        else:
            coeff = G.add(G.mul(pos, alpha_e), G.mul(neg, slope_e))
            c = G.add(c, G.sum_(G.mul(neg, _expand(intercept)), axis=-1))
        wj, bj = weights[j]
        a = G.matmul(coeff, wj)
        c = G.add(c, G.matmul(coeff, bj))
    return a, c


def bounds_graph(
    params: MlpParams,
    lower: Tensor,
    upper: Tensor,
    *,
    output_rows: Optional[Sequence[int]] = None,
    detach_intermediate: bool = False,
    intersect_interval: bool = True,
    need_lower: bool = True,
) -> Dict[str, object]:
    """Bounds of ``params`` over [lower, upper] built on the tape.

    ``lower``/``upper`` may carry leading batch dimensions. ``output_rows``
    restricts the final layer to a subset of outputs.
    """
    weights = [(G.constant(w), G.constant(b)) for w, b in params.layers]
    last = len(weights) - 1

    relaxations: List[Tuple[np.ndarray, Tensor, Tensor]] = []
    hidden_lower: List[Tensor] = []
    hidden_upper: List[Tensor] = []
    post_lo, post_hi = lower, upper

    for k in range(last):
        w, b = weights[k]
        ibp_l, ibp_u = _interval_affine(w, b, post_lo, post_hi)
        if k == 0:
            l_k, u_k = ibp_l, ibp_u
        else:
            a_u, c_u = _backsubstitute(weights, relaxations, k, None, upper=True)
            a_l, c_l = _backsubstitute(weights, relaxations, k, None, upper=False)
            u_k = _concretize(a_u, c_u, lower, upper, upper=True)
            l_k = _concretize(a_l, c_l, lower, upper, upper=False)
            if intersect_interval:
                u_k = G.minimum(u_k, ibp_u)
                l_k = G.maximum(l_k, ibp_l)
        hidden_lower.append(l_k)
        hidden_upper.append(u_k)
        l_rel, u_rel = (G.detach(l_k), G.detach(u_k)) if detach_intermediate else (l_k, u_k)
        relaxations.append(relax_graph(l_rel, u_rel))
        post_lo, post_hi = G.relu(l_k), G.relu(u_k)

    w, b = weights[last]
    if output_rows is not None:
        w, b = G.take(w, list(output_rows)), G.take(b, list(output_rows))
    ibp_l, ibp_u = _interval_affine(w, b, post_lo, post_hi)

    a_u, c_u = _backsubstitute(weights, relaxations, last, output_rows, upper=True)
    out_u = _concretize(a_u, c_u, lower, upper, upper=True)
    if intersect_interval:
        out_u = G.minimum(out_u, ibp_u)
    result: Dict[str, object] = {"a_upper": a_u, "b_upper": c_u}

    out_l = None
    if need_lower:
        a_l, c_l = _backsubstitute(weights, relaxations, last, output_rows, upper=False)
        out_l = _concretize(a_l, c_l, lower, upper, upper=False)
        if intersect_interval:
            out_l = G.maximum(out_l, ibp_l)
        result.update(a_lower=a_l, b_lower=c_l)

    if params.output_activation == "sigmoid":
        out_u = G.sigmoid(out_u)
        out_l = G.sigmoid(out_l) if out_l is not None else None

    result.update(upper=out_u, lower=out_l, hidden_lower=hidden_lower, hidden_upper=hidden_upper)
    return result


def _check_box(params: MlpParams, box: BoxBounds) -> None:
    if box.dim != params.input_dim:
        raise BoundPropagationError(f"Box has {box.dim} dims, network expects {params.input_dim}")


def propagate_bounds(
    params: MlpParams,
    box: BoxBounds,
    *,
    detach_intermediate: bool = False,
    intersect_interval: bool = True,
) -> BoundResult:
    """Sound output bounds, bounding hyperplanes and hidden-layer bounds."""
    _check_box(params, box)
    res = bounds_graph(
        params,
        G.constant(box.lower),
        G.constant(box.upper),
        detach_intermediate=detach_intermediate,
        intersect_interval=intersect_interval,
    )
    a_l, a_u = res["a_lower"].value, res["a_upper"].value
    batch = box.lower.shape[:-1]
    linear = LinearBounds(
        a_lower=np.broadcast_to(a_l, batch + a_l.shape[-2:]).copy(),
        b_lower=np.broadcast_to(res["b_lower"].value, batch + a_l.shape[-2:-1]).copy(),
        a_upper=np.broadcast_to(a_u, batch + a_u.shape[-2:]).copy(),
        b_upper=np.broadcast_to(res["b_upper"].value, batch + a_u.shape[-2:-1]).copy(),
    )
    layers = LayerBounds(
        lower=tuple(t.value for t in res["hidden_lower"]),
        upper=tuple(t.value for t in res["hidden_upper"]),
    )
    return BoundResult(lower=res["lower"].value, upper=res["upper"].value, linear=linear, layers=layers)


def upper_bound_value_and_gradient(
    params: MlpParams,
    box: BoxBounds,
    concrete_dims: Sequence[int],
    output_index: int,
    *,
    detach_intermediate: bool = False,
    intersect_interval: bool = True,
) -> Tuple[np.ndarray, np.ndarray]:
    """Concretized upper bound of output ``output_index`` and its gradient.

    The gradient is taken with respect to the coordinates ``concrete_dims``,
    which must have zero width in ``box``. A batched box (B, n) returns
    values (B,) and gradients (B, len(concrete_dims)).
    """
    _check_box(params, box)
    dims = [int(d) for d in concrete_dims]
    if not 0 <= output_index < params.output_dim:
        raise BoundPropagationError(f"Output index {output_index} outside 0..{params.output_dim - 1}")
    if dims and np.any(box.width[..., dims] != 0.0):
        raise BoundPropagationError("Gradient dims must be concrete (zero width) in the box")

    n = box.dim
    scatter = np.zeros((len(dims), n))
    scatter[np.arange(len(dims)), dims] = 1.0
    base_lower = box.lower.copy()
    base_upper = box.upper.copy()
    base_lower[..., dims] = 0.0
    base_upper[..., dims] = 0.0

    x = G.variable(box.lower[..., dims])
    placed = G.matmul(x, scatter)
    res = bounds_graph(
        params,
        G.add(base_lower, placed),
        G.add(base_upper, placed),
        output_rows=[output_index],
        detach_intermediate=detach_intermediate,
        intersect_interval=intersect_interval,
        need_lower=False,
    )
    ub = G.sum_(res["upper"], axis=-1)
    G.backward(G.sum_(ub))
    return ub.value, x.grad


def upper_bound_gradient(
    params: MlpParams,
    box: BoxBounds,
    concrete_dims: Sequence[int],
    output_index: int,
    *,
    detach_intermediate: bool = False,
    intersect_interval: bool = True,
) -> np.ndarray:
    """Gradient of the concretized upper bound over the concrete input coordinates."""
    _, grad = upper_bound_value_and_gradient(
        params,
        box,
        concrete_dims,
        output_index,
        detach_intermediate=detach_intermediate,
        intersect_interval=intersect_interval,
    )
    return grad

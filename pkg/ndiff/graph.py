"""
Reverse-mode Differentiation Graph

A small tape over numpy arrays. Every operation returns a new ``Tensor`` that
remembers its parents together with a closure mapping the output adjoint to
the parent adjoint. Only tensors that (transitively) depend on a variable keep
parents, so constant sub-expressions cost nothing on the backward pass.

Usage:
    from ndiff import graph as G

    x = G.variable(np.array([3.0]))
    y = (x * x).sum()
    G.backward(y)
    x.grad  # -> array([6.])
"""

from typing import Callable, List, Optional, Sequence, Tuple, Union
import logging

import numpy as np


logger = logging.getLogger(__name__)

ArrayLike = Union[np.ndarray, float, int, Sequence[float]]
Backfn = Callable[[np.ndarray], np.ndarray]


class GraphError(Exception):
    """Raised on shape mismatches or invalid backward calls."""
    pass


class Tensor:
    """A node of the graph: value, parents and accumulated adjoint."""

    __slots__ = ("value", "parents", "grad", "requires_grad")

    def __init__(
        self,
        value: ArrayLike,
        parents: Tuple[Tuple["Tensor", Backfn], ...] = (),
        requires_grad: bool = False,
    ):
        self.value = np.asarray(value, dtype=np.float64)
        self.parents = parents
        self.requires_grad = requires_grad or bool(parents)
        self.grad: Optional[np.ndarray] = None

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.value.shape

    @property
    def ndim(self) -> int:
        return self.value.ndim

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    # Operator sugar
    def __add__(self, other): return add(self, other)
    def __radd__(self, other): return add(other, self)
    def __sub__(self, other): return sub(self, other)
    def __rsub__(self, other): return sub(other, self)
    def __mul__(self, other): return mul(self, other)
    def __rmul__(self, other): return mul(other, self)
    def __neg__(self): return neg(self)
    def __matmul__(self, other): return matmul(self, other)
    def __rmatmul__(self, other): return matmul(other, self)
    def __truediv__(self, other): return mul(self, reciprocal(other))
    def __getitem__(self, index): return take(self, index)

    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        return sum_(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        return mean(self, axis=axis, keepdims=keepdims)


def as_tensor(value: Union[Tensor, ArrayLike]) -> Tensor:
    """Wrap raw values as constants; pass tensors through."""
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


def constant(value: ArrayLike) -> Tensor:
    return Tensor(np.array(value, dtype=np.float64))


def variable(value: ArrayLike) -> Tensor:
    """Leaf tensor whose gradient is wanted."""
    return Tensor(np.array(value, dtype=np.float64), requires_grad=True)


def detach(t: Tensor) -> Tensor:
    return Tensor(t.value)


def unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum ``grad`` down to ``shape`` undoing numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


def _node(value: np.ndarray, *links: Tuple[Tensor, Backfn]) -> Tensor:
    kept = tuple((p, fn) for p, fn in links if p.requires_grad)
    return Tensor(value, parents=kept)


# ---------------------------------------------------------------------------
# Elementwise arithmetic
# ---------------------------------------------------------------------------

def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    try:
        out = a.value + b.value
    except ValueError as e:
        raise GraphError(f"add: incompatible shapes {a.shape} and {b.shape}") from e
    return _node(
        out,
        (a, lambda g: unbroadcast(g, a.shape)),
        (b, lambda g: unbroadcast(g, b.shape)),
    )


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    try:
        out = a.value - b.value
    except ValueError as e:
        raise GraphError(f"sub: incompatible shapes {a.shape} and {b.shape}") from e
    return _node(
        out,
        (a, lambda g: unbroadcast(g, a.shape)),
        (b, lambda g: unbroadcast(-g, b.shape)),
    )


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    try:
        out = a.value * b.value
    except ValueError as e:
        raise GraphError(f"mul: incompatible shapes {a.shape} and {b.shape}") from e
    return _node(
        out,
        (a, lambda g: unbroadcast(g * b.value, a.shape)),
        (b, lambda g: unbroadcast(g * a.value, b.shape)),
    )


def neg(a) -> Tensor:
    a = as_tensor(a)
    return _node(-a.value, (a, lambda g: -g))


def reciprocal(a) -> Tensor:
    a = as_tensor(a)
    out = 1.0 / a.value
    return _node(out, (a, lambda g: -g * out * out))


def square(a) -> Tensor:
    a = as_tensor(a)
    return _node(a.value * a.value, (a, lambda g: 2.0 * g * a.value))


def exp(a) -> Tensor:
    a = as_tensor(a)
    out = np.exp(a.value)
    return _node(out, (a, lambda g: g * out))


def log(a) -> Tensor:
    a = as_tensor(a)
    return _node(np.log(a.value), (a, lambda g: g / a.value))


def tanh(a) -> Tensor:
    a = as_tensor(a)
    out = np.tanh(a.value)
    return _node(out, (a, lambda g: g * (1.0 - out * out)))


def sigmoid(a) -> Tensor:
    a = as_tensor(a)
    out = 0.5 * (1.0 + np.tanh(0.5 * a.value))
    return _node(out, (a, lambda g: g * out * (1.0 - out)))


def softplus(a) -> Tensor:
    """log(1 + e^x) evaluated without overflow."""
    a = as_tensor(a)
    x = a.value
    out = np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))
    slope = 0.5 * (1.0 + np.tanh(0.5 * x))
    return _node(out, (a, lambda g: g * slope))


def relu(a) -> Tensor:
    """ReLU with subgradient 0 at the kink."""
    a = as_tensor(a)
    mask = a.value > 0.0
    return _node(np.where(mask, a.value, 0.0), (a, lambda g: g * mask))


def maximum(a, b) -> Tensor:
    """Elementwise max; ties route the adjoint to ``a``."""
    a, b = as_tensor(a), as_tensor(b)
    pick_a = a.value >= b.value
    out = np.where(pick_a, a.value, b.value)
    return _node(
        out,
        (a, lambda g: unbroadcast(g * pick_a, a.shape)),
        (b, lambda g: unbroadcast(g * ~pick_a, b.shape)),
    )


def minimum(a, b) -> Tensor:
    """Elementwise min; ties route the adjoint to ``a``."""
    a, b = as_tensor(a), as_tensor(b)
    pick_a = a.value <= b.value
    out = np.where(pick_a, a.value, b.value)
    return _node(
        out,
        (a, lambda g: unbroadcast(g * pick_a, a.shape)),
        (b, lambda g: unbroadcast(g * ~pick_a, b.shape)),
    )


def where(condition: np.ndarray, a, b) -> Tensor:
    """Select by a fixed boolean mask (the mask itself carries no gradient)."""
    a, b = as_tensor(a), as_tensor(b)
    cond = np.asarray(condition, dtype=bool)
    out = np.where(cond, a.value, b.value)
    return _node(
        out,
        (a, lambda g: unbroadcast(np.where(cond, g, 0.0), a.shape)),
        (b, lambda g: unbroadcast(np.where(cond, 0.0, g), b.shape)),
    )


def positive_part(a) -> Tensor:
    """max(a, 0) with the zero entries treated as the negative branch."""
    a = as_tensor(a)
    mask = a.value > 0.0
    return _node(np.where(mask, a.value, 0.0), (a, lambda g: g * mask))


def negative_part(a) -> Tensor:
    """min(a, 0); together with ``positive_part`` sums back to ``a``."""
    a = as_tensor(a)
    mask = a.value < 0.0
    return _node(np.where(mask, a.value, 0.0), (a, lambda g: g * mask))


# ---------------------------------------------------------------------------
# Linear algebra and reductions
# ---------------------------------------------------------------------------

def matmul(a, b) -> Tensor:
    """numpy ``@`` semantics including 1-D operands and batch broadcasting."""
    a, b = as_tensor(a), as_tensor(b)
    av, bv = a.value, b.value
    try:
        out = av @ bv
    except ValueError as e:
        raise GraphError(f"matmul: incompatible shapes {a.shape} and {b.shape}") from e

    def grad_a(g: np.ndarray) -> np.ndarray:
        if av.ndim == 1 and bv.ndim == 1:
            ga = g * bv
        elif bv.ndim == 1:
            ga = g[..., None] * bv
        elif av.ndim == 1:
            ga = (bv @ g[..., None])[..., 0]
        else:
            ga = g @ np.swapaxes(bv, -1, -2)
        return unbroadcast(ga, av.shape)

    def grad_b(g: np.ndarray) -> np.ndarray:
        if av.ndim == 1 and bv.ndim == 1:
            gb = g * av
        elif bv.ndim == 1:
            gb = (np.swapaxes(av, -1, -2) @ g[..., None])[..., 0]
        elif av.ndim == 1:
            gb = av[:, None] * g[..., None, :]
        else:
            gb = np.swapaxes(av, -1, -2) @ g
        return unbroadcast(gb, bv.shape)

    return _node(out, (a, grad_a), (b, grad_b))


def sum_(a, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    out = a.value.sum(axis=axis, keepdims=keepdims)

    def back(g: np.ndarray) -> np.ndarray:
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return np.broadcast_to(g, a.shape).copy()

    return _node(out, (a, back))


def mean(a, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    count = a.value.size if axis is None else np.prod(
        [a.shape[i] for i in np.atleast_1d(axis)]
    )
    return mul(sum_(a, axis=axis, keepdims=keepdims), 1.0 / float(count))


def amax(a, axis: int = -1) -> Tensor:
    """Maximum along one axis; the adjoint goes to the first maximizer."""
    a = as_tensor(a)
    idx = np.argmax(a.value, axis=axis)
    out = np.take_along_axis(a.value, np.expand_dims(idx, axis), axis=axis)
    out = np.squeeze(out, axis=axis)

    def back(g: np.ndarray) -> np.ndarray:
        grad = np.zeros_like(a.value)
        np.put_along_axis(grad, np.expand_dims(idx, axis), np.expand_dims(g, axis), axis=axis)
        return grad

    return _node(out, (a, back))


def take(a, index) -> Tensor:
    """Basic or advanced indexing."""
    a = as_tensor(a)
    out = a.value[index]

    def back(g: np.ndarray) -> np.ndarray:
        grad = np.zeros_like(a.value)
        np.add.at(grad, index, g)
        return grad

    return _node(np.array(out, dtype=np.float64), (a, back))


def concat(tensors: Sequence, axis: int = -1) -> Tensor:
    parts = [as_tensor(t) for t in tensors]
    out = np.concatenate([p.value for p in parts], axis=axis)
    bounds = np.cumsum([0] + [p.shape[axis] for p in parts])
    links = []
    for i, p in enumerate(parts):
        lo, hi = int(bounds[i]), int(bounds[i + 1])

        def back(g: np.ndarray, lo=lo, hi=hi) -> np.ndarray:
            return np.take(g, np.arange(lo, hi), axis=axis)

        links.append((p, back))
    return _node(out, *links)


def reshape(a, shape: Tuple[int, ...]) -> Tensor:
    a = as_tensor(a)
    return _node(a.value.reshape(shape), (a, lambda g: g.reshape(a.shape)))


def expand_dims(a, axis: int) -> Tensor:
    a = as_tensor(a)
    return _node(np.expand_dims(a.value, axis), (a, lambda g: g.reshape(a.shape)))


def transpose(a) -> Tensor:
    """Swap the last two axes."""
    a = as_tensor(a)
    return _node(np.swapaxes(a.value, -1, -2), (a, lambda g: np.swapaxes(g, -1, -2)))


def clip(a, low, high) -> Tensor:
    """Clamp values; the adjoint passes only where the value was inside."""
    a = as_tensor(a)
    inside = (a.value >= low) & (a.value <= high)
    return _node(np.clip(a.value, low, high), (a, lambda g: g * inside))


# ---------------------------------------------------------------------------
# Backward pass
# ---------------------------------------------------------------------------

def _topological_order(output: Tensor) -> List[Tensor]:
    order: List[Tensor] = []
    seen = set()
    stack: List[Tuple[Tensor, bool]] = [(output, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent, _ in node.parents:
            if id(parent) not in seen:
                stack.append((parent, False))
    return order


def backward(output: Tensor, seed: Optional[np.ndarray] = None) -> None:
    """Accumulate d(output)/d(node) into ``grad`` of every node reaching it.

    A non-scalar output needs an explicit ``seed`` adjoint.
    """
    if seed is None:
        if output.value.size != 1:
            raise GraphError(
                f"backward on non-scalar output of shape {output.shape} needs a seed"
            )
        seed = np.ones_like(output.value)
    seed = np.asarray(seed, dtype=np.float64)
    if seed.shape != output.shape:
        raise GraphError(f"seed shape {seed.shape} does not match output {output.shape}")

    order = _topological_order(output)
    for node in order:
        node.grad = np.zeros_like(node.value)
    output.grad = seed.copy()

    for node in reversed(order):
        for parent, fn in node.parents:
            parent.grad = parent.grad + fn(node.grad)


def grad(output: Tensor, inputs: Sequence[Tensor]) -> List[np.ndarray]:
    """Convenience wrapper returning gradients for ``inputs`` (zeros if unreachable)."""
    for t in inputs:
        t.grad = None
    backward(output)
    return [t.grad if t.grad is not None else np.zeros_like(t.value) for t in inputs]

"""
Dense ReLU networks.

``MlpParams`` is an immutable snapshot of weights. ``forward_mlp`` evaluates it
with plain numpy; ``forward_graph`` builds the same computation on the ndiff
tape so that losses can be differentiated with respect to the weights or the
input.
"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple
import logging

import numpy as np

from . import graph as G
from .graph import GraphError, Tensor


logger = logging.getLogger(__name__)

OUTPUT_ACTIVATIONS = ("identity", "sigmoid")

Layer = Tuple[np.ndarray, np.ndarray]


@dataclass(frozen=True)
class MlpParams:
    """Weights ``W`` stored as (out, in) matrices, one bias per layer."""

    layers: Tuple[Layer, ...]
    output_activation: str = "identity"

    def __post_init__(self):
        if not self.layers:
            raise GraphError("MlpParams needs at least one layer")
        if self.output_activation not in OUTPUT_ACTIVATIONS:
            raise GraphError(f"Unknown output activation: {self.output_activation}")
        prev = None
        for i, (w, b) in enumerate(self.layers):
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise GraphError(f"Layer {i}: weight {w.shape} and bias {b.shape} disagree")
            if prev is not None and w.shape[1] != prev:
                raise GraphError(f"Layer {i}: expects {w.shape[1]} inputs, previous layer gives {prev}")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise GraphError(f"Layer {i}: non-finite parameters")
            prev = w.shape[0]

    @property
    def input_dim(self) -> int:
        return self.layers[0][0].shape[1]

    @property
    def output_dim(self) -> int:
        return self.layers[-1][0].shape[0]

    @property
    def dims(self) -> List[int]:
        """[input, hidden..., output] widths."""
        return [self.input_dim] + [w.shape[0] for w, _ in self.layers]

    def arrays(self) -> List[np.ndarray]:
        """Flat parameter list in declaration order (W0, b0, W1, b1, ...)."""
        out: List[np.ndarray] = []
        for w, b in self.layers:
            out.extend([w, b])
        return out

    @classmethod
    def from_arrays(cls, arrays: Sequence[np.ndarray], output_activation: str = "identity") -> "MlpParams":
        if len(arrays) % 2:
            raise GraphError("Parameter list must alternate weights and biases")
        layers = tuple(
            (np.array(arrays[i], dtype=np.float64), np.array(arrays[i + 1], dtype=np.float64))
            for i in range(0, len(arrays), 2)
        )
        return cls(layers=layers, output_activation=output_activation)

    def equals(self, other: "MlpParams") -> bool:
        if self.output_activation != other.output_activation or len(self.layers) != len(other.layers):
            return False
        return all(
            np.array_equal(a, b) for a, b in zip(self.arrays(), other.arrays())
        )


def init_mlp(
    sizes: Sequence[int],
    rng: np.random.Generator,
    output_activation: str = "identity",
) -> MlpParams:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization."""
    layers = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        w = rng.uniform(-bound, bound, size=(fan_out, fan_in))
        b = rng.uniform(-bound, bound, size=fan_out)
        layers.append((w, b))
    return MlpParams(layers=tuple(layers), output_activation=output_activation)


def forward_mlp(params: MlpParams, x: np.ndarray) -> np.ndarray:
    """Evaluate the network on ``x`` of shape (..., input_dim)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != params.input_dim:
        raise GraphError(f"Input has {x.shape[-1]} features, network expects {params.input_dim}")
    h = x
    last = len(params.layers) - 1
    for i, (w, b) in enumerate(params.layers):
        h = h @ w.T + b
        if i < last:
            h = np.maximum(h, 0.0)
    if params.output_activation == "sigmoid":
        h = 0.5 * (1.0 + np.tanh(0.5 * h))
    return h


def as_variables(params: MlpParams) -> List[Tuple[Tensor, Tensor]]:
    """Leaf tensors for every weight and bias."""
    return [(G.variable(w), G.variable(b)) for w, b in params.layers]


def as_constants(params: MlpParams) -> List[Tuple[Tensor, Tensor]]:
    return [(G.constant(w), G.constant(b)) for w, b in params.layers]


def forward_graph(
    weights: Sequence[Tuple[Tensor, Tensor]],
    x,
    output_activation: str = "identity",
) -> Tensor:
    """Same as ``forward_mlp`` on the tape."""
    h = G.as_tensor(x)
    last = len(weights) - 1
    for i, (w, b) in enumerate(weights):
        h = G.add(G.matmul(h, G.transpose(w)), b)
        if i < last:
            h = G.relu(h)
    if output_activation == "sigmoid":
        h = G.sigmoid(h)
    return h


def gradients_of(weights: Sequence[Tuple[Tensor, Tensor]]) -> List[np.ndarray]:
    """Collect ``grad`` from variable weights in ``arrays()`` order."""
    out: List[np.ndarray] = []
    for w, b in weights:
        for t in (w, b):
            out.append(t.grad if t.grad is not None else np.zeros_like(t.value))
    return out

"""
Minimal reverse-mode differentiation, dense ReLU networks and Adam.

Shared by the SAC trainer, the bound propagation engine and the attack
optimizers.
"""

from .graph import (
    GraphError,
    Tensor,
    backward,
    constant,
    detach,
    grad,
    variable,
)
from .mlp import (
    MlpParams,
    as_constants,
    as_variables,
    forward_graph,
    forward_mlp,
    gradients_of,
    init_mlp,
)
from .adam import AdamState, adam_step
from .checkpoint_io import CheckpointFormatError, load_weights, save_weights

__all__ = [
    "GraphError",
    "Tensor",
    "backward",
    "constant",
    "detach",
    "grad",
    "variable",
    "MlpParams",
    "as_constants",
    "as_variables",
    "forward_graph",
    "forward_mlp",
    "gradients_of",
    "init_mlp",
    "AdamState",
    "adam_step",
    "CheckpointFormatError",
    "load_weights",
    "save_weights",
]

"""
User-selection MDP.

Action codec, proto-action lattice, observation construction, observation
normalizer and the proportional-fair transition.
"""

from .actions import (
    ActionCodecError,
    action_count,
    all_subsets,
    decode_action,
    encode_action,
    selection_matrix,
)
from .lattice import ProtoLattice, build_lattice, knn
from .observation import (
    block_size,
    build_observation,
    csi_dims,
    csi_from_blocks,
    observation_dim,
    rate_dims,
    user_dims,
)
from .normalizer import (
    STD_EPSILON,
    NormalizerNotReadyError,
    NormalizerState,
    denormalize,
    normalize,
    normalizer_update,
    observation_box,
)
from .env import RATE_EPSILON, RATE_FLOOR, EnvDoneError, EnvState, observe, reset, slot_rates, step

__all__ = [
    "ActionCodecError",
    "action_count",
    "all_subsets",
    "decode_action",
    "encode_action",
    "selection_matrix",
    "ProtoLattice",
    "build_lattice",
    "knn",
    "block_size",
    "build_observation",
    "csi_dims",
    "csi_from_blocks",
    "observation_dim",
    "rate_dims",
    "user_dims",
    "STD_EPSILON",
    "NormalizerNotReadyError",
    "NormalizerState",
    "denormalize",
    "normalize",
    "normalizer_update",
    "observation_box",
    "RATE_EPSILON",
    "RATE_FLOOR",
    "EnvDoneError",
    "EnvState",
    "observe",
    "reset",
    "slot_rates",
    "step",
]

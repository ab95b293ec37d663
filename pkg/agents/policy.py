"""
Wolpertinger action selection.

The actor outputs a Gaussian (mean, log-std) per proto dimension; a sample
z is squashed to u = (tanh(z) + 1) / 2 in [0, 1]^D. The k nearest assigned
lattice actions to u are scored by the twin critics and the one with the
largest min(Q1, Q2) is taken.
"""

from typing import Optional, Sequence, Tuple
import logging

import numpy as np

from ndiff import graph as G
from ndiff.graph import Tensor
from ndiff.mlp import MlpParams, forward_mlp
from mdp.lattice import ProtoLattice, knn


logger = logging.getLogger(__name__)

LOG_STD_MIN = -5.0
LOG_STD_MAX = 2.0
MODES = ("explore", "greedy")


def split_actor_output(out: np.ndarray, proto_dims: int) -> Tuple[np.ndarray, np.ndarray]:
    mean = out[..., :proto_dims]
    log_std = np.clip(out[..., proto_dims:], LOG_STD_MIN, LOG_STD_MAX)
    return mean, log_std


def squash(z):
    """(tanh(z) + 1) / 2 for arrays or tensors."""
    if isinstance(z, Tensor):
        return G.mul(G.add(G.tanh(z), 1.0), 0.5)
    return 0.5 * (np.tanh(z) + 1.0)


def squash_log_det(z: Tensor) -> Tensor:
    """log |du/dz| per dim, computed as 2 (log 2 - z - softplus(-2z)) - log 2."""
    return G.sub(
        G.mul(G.sub(G.sub(np.log(2.0), z), G.softplus(G.mul(z, -2.0))), 2.0),
        np.log(2.0),
    )


def greedy_proto(actor: MlpParams, obs: np.ndarray) -> np.ndarray:
    proto_dims = actor.output_dim // 2
    mean, _ = split_actor_output(forward_mlp(actor, obs), proto_dims)
    return squash(mean)


def actor_mean_head(actor: MlpParams) -> MlpParams:
    """Network computing the greedy proto action directly.

    (tanh(m) + 1) / 2 = sigmoid(2m), so the mean rows of the last layer are
    doubled and tagged with a sigmoid output.
    """
    proto_dims = actor.output_dim // 2
    hidden = actor.layers[:-1]
    w, b = actor.layers[-1]
    head = (2.0 * w[:proto_dims].copy(), 2.0 * b[:proto_dims].copy())
    return MlpParams(layers=tuple(hidden) + (head,), output_activation="sigmoid")


def critic_values(
    critics: Sequence[MlpParams],
    obs: np.ndarray,
    protos: np.ndarray,
) -> np.ndarray:
    """min over critics of Q(obs, u) for each row of ``protos``."""
    protos = np.atleast_2d(protos)
    inputs = np.concatenate([np.broadcast_to(obs, (protos.shape[0], obs.shape[-1])), protos], axis=1)
    values = np.stack([forward_mlp(c, inputs)[:, 0] for c in critics])
    return values.min(axis=0)


def select_action(
    actor: MlpParams,
    critics: Sequence[MlpParams],
    lattice: ProtoLattice,
    obs: np.ndarray,
    k: int,
    mode: str = "greedy",
    rng: Optional[np.random.Generator] = None,
) -> Tuple[int, np.ndarray]:
    """(action index, chosen lattice point) for a normalized observation."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    mean, log_std = split_actor_output(forward_mlp(actor, obs), lattice.dims)
    if mode == "explore":
        if rng is None:
            raise ValueError("explore mode needs an rng")
        z = mean + np.exp(log_std) * rng.standard_normal(mean.shape)
    else:
        z = mean
    proto = squash(z)

    candidates = sorted(a for a, _ in knn(lattice, proto, k))
    if len(candidates) == 1:
        action = candidates[0]
    else:
        scores = critic_values(critics, obs, lattice.points[candidates])
        action = candidates[int(np.argmax(scores))]
    return action, lattice.point(action).copy()

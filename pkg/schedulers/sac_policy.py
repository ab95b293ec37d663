"""Trained Wolpertinger scheduler (greedy inference)."""

import logging

import numpy as np

from agents.checkpoint import Checkpoint
from agents.policy import select_action
from mdp.actions import action_count
from mdp.lattice import ProtoLattice, build_lattice
from mdp.normalizer import normalize
from .base import PolicyKind, Scheduler, SchedulerConfigError, SlotContext


logger = logging.getLogger(__name__)


def sac_policy(checkpoint: Checkpoint, lattice: ProtoLattice, obs: np.ndarray, k: int) -> int:
    """normalize -> greedy proto -> k nearest lattice actions -> critic argmax."""
    obs = np.asarray(obs, dtype=np.float64)
    if obs.shape != (checkpoint.obs_dim,):
        raise SchedulerConfigError(
            f"Observation has shape {obs.shape}, checkpoint expects ({checkpoint.obs_dim},)"
        )
    action, _ = select_action(
        checkpoint.actor, checkpoint.critics, lattice, normalize(checkpoint.normalizer, obs), k, mode="greedy"
    )
    return action


class SacScheduler(Scheduler):
    kind = PolicyKind.SAC

    def __init__(self, checkpoint: Checkpoint, num_users: int, max_selected: int, tx_power: float, noise_variance: float):
        super().__init__(num_users, max_selected, tx_power, noise_variance)
        env = checkpoint.env_config
        if (env.num_users, env.max_selected) != (num_users, max_selected):
            raise SchedulerConfigError(
                f"Checkpoint trained for L={env.num_users}, N={env.max_selected}; "
                f"run uses L={num_users}, N={max_selected}"
            )
        self.checkpoint = checkpoint
        self.lattice = build_lattice(action_count(num_users, max_selected), checkpoint.sac_config.proto_dims)
        self.k = checkpoint.sac_config.knn_k

    def select(self, context: SlotContext) -> int:
        return sac_policy(self.checkpoint, self.lattice, context.observation, self.k)

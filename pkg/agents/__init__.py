"""
Wolpertinger soft actor-critic scheduler.

Quick start:
    from agents import SacConfig, train

    checkpoint = train(env_factory, SacConfig(total_steps=60000), env_config)
    checkpoint.save("results/sac.fggm")
"""

from .config import SacConfig, SacConfigError
from .replay import Batch, ReplayBuffer, Transition
from .policy import (
    actor_mean_head,
    critic_values,
    greedy_proto,
    select_action,
    squash,
)
from .checkpoint import Checkpoint
from .trainer import (
    SacNetworks,
    TrainingDivergedError,
    actor_loss_graph,
    init_networks,
    normalize_batch,
    sac_update,
    train,
)

__all__ = [
    "SacConfig",
    "SacConfigError",
    "Batch",
    "ReplayBuffer",
    "Transition",
    "actor_mean_head",
    "critic_values",
    "greedy_proto",
    "select_action",
    "squash",
    "Checkpoint",
    "SacNetworks",
    "TrainingDivergedError",
    "actor_loss_graph",
    "init_networks",
    "normalize_batch",
    "sac_update",
    "train",
]

"""
Grey-box observation attacks on the trained scheduler.

Usage:
    from attack import ThreatModel, run_attack

    threat = threat_from_checkpoint(checkpoint, adversaries=(0, 1), delta_adv=2.0, delta_vic=1.5)
    result = run_attack(checkpoint, threat, attack_config)
"""

from typing import Sequence
import logging

from agents.checkpoint import Checkpoint
from shared.schemas.experiment import AttackConfig
from .threat import (
    AttackContractError,
    AttackResult,
    ThreatModel,
    build_attack_box,
    network_box,
    protos_within,
    reachable_victim_protos,
    victim_actions,
)
from .fggm import attack_upper_bounds, fggm
from .spgd import spgd
from .noise import noise_attack


logger = logging.getLogger(__name__)


def threat_from_checkpoint(
    checkpoint: Checkpoint,
    adversaries: Sequence[int],
    delta_adv: float,
    delta_vic: float,
    falsify_rate_dims: bool = False,
) -> ThreatModel:
    env = checkpoint.env_config
    return ThreatModel(
        num_users=env.num_users,
        num_antennas=env.num_antennas,
        max_selected=env.max_selected,
        adversaries=tuple(adversaries),
        delta_adv=delta_adv,
        delta_vic=delta_vic,
        normalizer=checkpoint.normalizer,
        falsify_rate_dims=falsify_rate_dims,
    )


def run_attack(checkpoint: Checkpoint, threat: ThreatModel, config: AttackConfig) -> AttackResult:
    """Dispatch an optimizing attack (fggm or spgd) against critic #1."""
    if config.scheme == "fggm":
        return fggm(
            checkpoint.actor,
            checkpoint.critic_1,
            threat,
            restarts=config.restarts,
            iterations=config.iterations,
            step_size=config.step_size,
            seed=config.seed,
            aggregation=config.aggregation,
            detach_intermediate=config.detach_intermediate,
        )
    if config.scheme == "spgd":
        return spgd(
            checkpoint.actor,
            checkpoint.critic_1,
            threat,
            num_samples=config.samples,
            restarts=config.restarts,
            iterations=config.iterations,
            step_size=config.step_size,
            seed=config.seed,
            aggregation=config.aggregation,
        )
    raise AttackContractError(f"Scheme {config.scheme!r} has no precomputed o_adv")


__all__ = [
    "AttackContractError",
    "AttackResult",
    "ThreatModel",
    "attack_upper_bounds",
    "build_attack_box",
    "fggm",
    "network_box",
    "noise_attack",
    "protos_within",
    "reachable_victim_protos",
    "run_attack",
    "spgd",
    "threat_from_checkpoint",
    "victim_actions",
]

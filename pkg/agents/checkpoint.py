"""
Trained scheduler checkpoint.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Tuple
import logging

from ndiff import MlpParams, load_weights, save_weights
from ndiff.checkpoint_io import CheckpointFormatError
from mdp.normalizer import NormalizerState
from shared.schemas.environment import EnvConfig
from .config import SacConfig


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Checkpoint:
    actor: MlpParams
    critic_1: MlpParams
    critic_2: MlpParams
    normalizer: NormalizerState
    sac_config: SacConfig
    env_config: EnvConfig

    @property
    def critics(self) -> Tuple[MlpParams, MlpParams]:
        return self.critic_1, self.critic_2

    @property
    def obs_dim(self) -> int:
        return self.actor.input_dim

    def save(self, path: Path) -> Path:
        return save_weights(
            {"actor": self.actor, "critic_1": self.critic_1, "critic_2": self.critic_2},
            self.normalizer,
            path,
            meta={
                "sac_config": self.sac_config.model_dump(mode="json"),
                "env_config": self.env_config.model_dump(mode="json"),
            },
        )

    @classmethod
    def load(cls, path: Path) -> "Checkpoint":
        networks, normalizer, meta = load_weights(path)
        missing = {"actor", "critic_1", "critic_2"} - set(networks)
        if missing or normalizer is None:
            raise CheckpointFormatError(f"{path}: not a scheduler checkpoint (missing {sorted(missing)})")
        ckpt = cls(
            actor=networks["actor"],
            critic_1=networks["critic_1"],
            critic_2=networks["critic_2"],
            normalizer=normalizer,
            sac_config=SacConfig(**meta["sac_config"]),
            env_config=EnvConfig(**meta["env_config"]),
        )
        logger.info(f"Loaded checkpoint {path} (obs_dim={ckpt.obs_dim}, D={ckpt.sac_config.proto_dims})")
        return ckpt

    def equals(self, other: "Checkpoint") -> bool:
        return (
            self.actor.equals(other.actor)
            and self.critic_1.equals(other.critic_1)
            and self.critic_2.equals(other.critic_2)
            and self.normalizer.equals(other.normalizer)
            and self.sac_config == other.sac_config
            and self.env_config == other.env_config
        )

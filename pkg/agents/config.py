"""
SAC scheduler configuration.

Example (flat YAML, same file as the experiment keys):
    proto_dims: 3
    knn_k: 20
    total_steps: 60000
    discount: 0.95
"""

from typing import Any, Dict, Literal, Tuple
import logging

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator


logger = logging.getLogger(__name__)


class SacConfigError(Exception):
    """Raised when SAC configuration is invalid."""
    pass


class SacConfig(BaseModel):
    """Hyperparameters of the Wolpertinger soft actor-critic."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    proto_dims: int = Field(default=3, ge=1, description="Proto-action dimensions D")
    knn_k: int = Field(default=20, ge=1, description="Lattice neighbours refined by the critic")
    actor_hidden: Tuple[int, ...] = Field(default=(128, 128))
    critic_hidden: Tuple[int, ...] = Field(default=(256, 256))
    replay_capacity: int = Field(default=100_000, ge=1)
    batch_size: int = Field(default=64, ge=1)
    discount: float = Field(default=0.95, ge=0.0, le=1.0)
    tau: float = Field(default=0.005, gt=0.0, le=1.0, description="Polyak coefficient")
    actor_lr: float = Field(default=3e-4, gt=0.0)
    critic_lr: float = Field(default=3e-4, gt=0.0)
    temperature_lr: float = Field(default=3e-4, gt=0.0)
    temperature_mode: Literal["auto", "fixed"] = "auto"
    initial_temperature: float = Field(default=0.2, ge=0.0)
    reward_scale: float = Field(default=1.0, gt=0.0)
    total_steps: int = Field(default=60_000, ge=0)
    warmup_steps: int = Field(default=1_000, ge=0)
    episode_length: int = Field(default=500, ge=1)
    log_interval: int = Field(default=500, ge=1)
    seed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _check_batch(self) -> "SacConfig":
        if self.batch_size > self.replay_capacity:
            raise ValueError(
                f"batch_size={self.batch_size} exceeds replay_capacity={self.replay_capacity}"
            )
        return self

    @property
    def target_entropy(self) -> float:
        return -float(self.proto_dims)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SacConfig":
        try:
            return cls(**data)
        except ValidationError as e:
            raise SacConfigError(f"Invalid SAC configuration: {e}") from e

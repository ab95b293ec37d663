"""
Scheduling environment schema.
"""

from pydantic import BaseModel, ConfigDict, Field, model_validator


class EnvConfig(BaseModel):
    """Dimensions and PF parameters of the user-selection MDP."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    num_users: int = Field(default=8, ge=1, le=64, description="Users L")
    num_antennas: int = Field(default=4, ge=1, description="Base-station antennas M")
    max_selected: int = Field(default=4, ge=1, description="Max users per slot N")
    beta: float = Field(default=0.5, ge=0.0, le=1.0, description="Average-rate forgetting factor")
    tx_power: float = Field(default=10.0, gt=0.0)
    noise_variance: float = Field(default=1.0, gt=0.0)
    proto_dims: int = Field(default=3, ge=1, description="Proto-action dimensions D")
    knn_k: int = Field(default=20, ge=1, description="Nearest lattice actions refined by the critic")

    @model_validator(mode="after")
    def _check_selection(self) -> "EnvConfig":
        if self.max_selected > self.num_users:
            raise ValueError(f"max_selected={self.max_selected} exceeds num_users={self.num_users}")
        return self

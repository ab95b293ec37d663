"""
Experiment, attack and sweep schemas.

Config files are flat: every key of ``ExperimentConfig`` sits at the top
level of the YAML file next to the SAC keys. ``attack_config`` and
``sweep_config`` give the typed views used by the attack and sweep code.
"""

from typing import Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .channel import ChannelConfig
from .environment import EnvConfig


PolicyName = Literal["random", "opt_pf", "opt_mr", "opt_pf_ug", "sac"]
AttackScheme = Literal["none", "fggm", "spgd", "noise"]
Aggregation = Literal["max", "sum"]
SweepAxis = Literal["delta_grid", "num_adversaries"]

DEFAULT_DELTAS = (0.5, 1.0, 1.5, 2.0, 2.5, 3.0)


class AttackConfig(BaseModel):
    """Threat parameters and optimizer budget of one attack run."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    scheme: AttackScheme = "fggm"
    adversaries: Tuple[int, ...] = (0, 1, 2, 3)
    delta_adv: float = Field(default=2.0, ge=0.0)
    delta_vic: float = Field(default=1.5, ge=0.0)
    restarts: int = Field(default=10, ge=1)
    iterations: int = Field(default=300, ge=0)
    samples: int = Field(default=100, ge=1, description="SPGD victim samples")
    step_size: float = Field(default=0.05, gt=0.0)
    aggregation: Aggregation = "max"
    falsify_rate_dims: bool = False
    detach_intermediate: bool = False
    seed: int = Field(default=0, ge=0)


class SweepConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    axis: SweepAxis = "delta_grid"
    delta_grid: Tuple[float, ...] = DEFAULT_DELTAS
    adversary_counts: Tuple[int, ...] = (1, 2, 4)
    seeds: int = Field(default=1, ge=1, description="Seeds per cell: seed, seed+1, ...")
    workers: int = Field(default=1, ge=1, description="Processes running cells")

    @model_validator(mode="after")
    def _check_grid(self) -> "SweepConfig":
        if self.axis == "delta_grid" and not self.delta_grid:
            raise ValueError("delta_grid must not be empty")
        if self.axis == "num_adversaries" and not self.adversary_counts:
            raise ValueError("adversary_counts must not be empty")
        if any(d < 0 for d in self.delta_grid):
            raise ValueError("delta_grid values must be >= 0")
        return self


class ExperimentConfig(BaseModel):
    """
    One evaluation run: system size, scheduler, attack and outputs.

    Defaults follow the reference setup: 8 users, 4 antennas, 4 selected
    per slot, beta 0.5, 500 slots, delta_adv 2.0 and delta_vic 1.5.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = "experiment"

    # System
    num_users: int = Field(default=8, ge=1, le=64)
    num_antennas: int = Field(default=4, ge=1)
    max_selected: int = Field(default=4, ge=1)
    beta: float = Field(default=0.5, ge=0.0, le=1.0)
    tx_power: float = Field(default=10.0, gt=0.0)
    noise_variance: float = Field(default=1.0, gt=0.0)
    doppler: float = Field(default=0.99, ge=0.0, lt=1.0)
    proto_dims: int = Field(default=3, ge=1)
    knn_k: int = Field(default=20, ge=1)
    trace_path: Optional[str] = None

    # Run
    num_slots: int = Field(default=500, ge=1)
    num_resource_blocks: int = Field(default=1, ge=1)
    bandwidth_mhz: float = Field(default=20.0, gt=0.0)
    policy: PolicyName = "sac"
    checkpoint_path: Optional[str] = None
    seed: int = Field(default=0, ge=0)
    output_dir: str = "outputs"
    track_mlflow: bool = False

    # Attack
    attack_scheme: AttackScheme = "none"
    num_adversaries: int = Field(default=4, ge=0)
    adversaries: Optional[Tuple[int, ...]] = None
    delta_adv: float = Field(default=2.0, ge=0.0)
    delta_vic: float = Field(default=1.5, ge=0.0)
    restarts: int = Field(default=10, ge=1)
    iterations: int = Field(default=300, ge=0)
    samples: int = Field(default=100, ge=1)
    step_size: float = Field(default=0.05, gt=0.0)
    aggregation: Aggregation = "max"
    falsify_rate_dims: bool = False
    detach_intermediate: bool = False
    attack_result_path: Optional[str] = None

    # Sweep
    sweep_axis: SweepAxis = "delta_grid"
    delta_grid: Tuple[float, ...] = DEFAULT_DELTAS
    adversary_counts: Tuple[int, ...] = (1, 2, 4)
    sweep_seeds: int = Field(default=1, ge=1)
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _check_users(self) -> "ExperimentConfig":
        if self.max_selected > self.num_users:
            raise ValueError(f"max_selected={self.max_selected} exceeds num_users={self.num_users}")
        if self.adversaries is not None:
            if len(set(self.adversaries)) != len(self.adversaries):
                raise ValueError(f"adversaries contain duplicates: {self.adversaries}")
            if any(a < 0 or a >= self.num_users for a in self.adversaries):
                raise ValueError(f"adversaries must lie in 0..{self.num_users - 1}")
        elif self.num_adversaries > self.num_users:
            raise ValueError(
                f"num_adversaries={self.num_adversaries} exceeds num_users={self.num_users}"
            )
        return self

    @property
    def adversary_users(self) -> Tuple[int, ...]:
        """Explicit adversaries, else the first ``num_adversaries`` users."""
        if self.adversaries is not None:
            return tuple(sorted(self.adversaries))
        return tuple(range(self.num_adversaries))

    @property
    def victim_users(self) -> Tuple[int, ...]:
        adv = set(self.adversary_users)
        return tuple(u for u in range(self.num_users) if u not in adv)

    def env_config(self) -> EnvConfig:
        return EnvConfig(
            num_users=self.num_users,
            num_antennas=self.num_antennas,
            max_selected=self.max_selected,
            beta=self.beta,
            tx_power=self.tx_power,
            noise_variance=self.noise_variance,
            proto_dims=self.proto_dims,
            knn_k=self.knn_k,
        )

    def channel_config(self, seed: Optional[int] = None) -> ChannelConfig:
        return ChannelConfig(
            num_antennas=self.num_antennas,
            num_users=self.num_users,
            noise_variance=self.noise_variance,
            tx_power=self.tx_power,
            doppler=self.doppler,
            seed=self.seed if seed is None else seed,
        )

    def attack_config(self) -> AttackConfig:
        scheme = "fggm" if self.attack_scheme == "none" else self.attack_scheme
        return AttackConfig(
            scheme=scheme,
            adversaries=self.adversary_users,
            delta_adv=self.delta_adv,
            delta_vic=self.delta_vic,
            restarts=self.restarts,
            iterations=self.iterations,
            samples=self.samples,
            step_size=self.step_size,
            aggregation=self.aggregation,
            falsify_rate_dims=self.falsify_rate_dims,
            detach_intermediate=self.detach_intermediate,
            seed=self.seed,
        )

    def sweep_config(self) -> SweepConfig:
        return SweepConfig(
            axis=self.sweep_axis,
            delta_grid=self.delta_grid,
            adversary_counts=self.adversary_counts,
            seeds=self.sweep_seeds,
            workers=self.workers,
        )

"""
Pydantic schemas for channel, environment and experiment configuration.
"""

from .channel import ChannelConfig
from .environment import EnvConfig
from .experiment import (
    DEFAULT_DELTAS,
    AttackConfig,
    ExperimentConfig,
    SweepConfig,
)

__all__ = [
    "AttackConfig",
    "ChannelConfig",
    "DEFAULT_DELTAS",
    "EnvConfig",
    "ExperimentConfig",
    "SweepConfig",
]

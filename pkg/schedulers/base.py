"""
Scheduler interface.

Every policy maps the slot's reported CSI, the average rates and the
observation built from them to one action index.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict

import numpy as np


class PolicyKind(str, Enum):
    """Scheduling policy classification."""

    RANDOM = "random"
    OPT_PF = "opt_pf"
    OPT_MR = "opt_mr"
    OPT_PF_UG = "opt_pf_ug"
    SAC = "sac"


class SchedulerConfigError(ValueError):
    """Scheduler cannot be built for the requested configuration."""
    pass


@dataclass(frozen=True)
class SlotContext:
    """What the base station knows when it schedules a slot."""

    slot: int
    reported_csi: np.ndarray
    average_rates: np.ndarray
    observation: np.ndarray


class Scheduler(ABC):
    """
    Base interface for all schedulers.

    Subclasses set ``kind`` and implement ``select``. Schedulers hold no
    per-slot state; randomness comes from a generator seeded at creation.
    """

    kind: PolicyKind = PolicyKind.RANDOM

    def __init__(
        self,
        num_users: int,
        max_selected: int,
        tx_power: float,
        noise_variance: float,
    ):
        self.num_users = num_users
        self.max_selected = max_selected
        self.tx_power = tx_power
        self.noise_variance = noise_variance

    @abstractmethod
    def select(self, context: SlotContext) -> int:
        """Action index for this slot."""
        pass

    def get_metadata(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "class_name": self.__class__.__name__,
            "num_users": self.num_users,
            "max_selected": self.max_selected,
        }

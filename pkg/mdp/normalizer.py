"""
Running observation statistics (Welford).

The scheduler normalizes every observation by the mean and sample standard
deviation gathered during training. The same statistics bound what a
grey-box attacker may assume about victim observations.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from shared.types import BoxBounds
from .observation import user_dims


STD_EPSILON = 1e-6


class NormalizerNotReadyError(ValueError):
    """Normalization needs at least two samples."""
    pass


@dataclass(frozen=True)
class NormalizerState:
    count: int
    mean: np.ndarray
    m2: np.ndarray

    @classmethod
    def empty(cls, dim: int) -> "NormalizerState":
        return cls(count=0, mean=np.zeros(dim), m2=np.zeros(dim))

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @property
    def std(self) -> np.ndarray:
        """Sample standard deviation (ddof=1); zeros before two samples."""
        if self.count < 2:
            return np.zeros_like(self.mean)
        return np.sqrt(np.maximum(self.m2, 0.0) / (self.count - 1))

    @property
    def scale(self) -> np.ndarray:
        return np.maximum(self.std, STD_EPSILON)

    def equals(self, other: "NormalizerState") -> bool:
        return (
            self.count == other.count
            and np.array_equal(self.mean, other.mean)
            and np.array_equal(self.m2, other.m2)
        )


def normalizer_update(state: NormalizerState, obs: np.ndarray) -> NormalizerState:
    obs = np.asarray(obs, dtype=np.float64)
    if obs.shape != state.mean.shape:
        raise ValueError(f"Observation shape {obs.shape} does not match normalizer {state.mean.shape}")
    count = state.count + 1
    delta = obs - state.mean
    mean = state.mean + delta / count
    m2 = state.m2 + delta * (obs - mean)
    return NormalizerState(count=count, mean=mean, m2=m2)


def normalize(state: NormalizerState, obs: np.ndarray) -> np.ndarray:
    """(obs - mean) / max(std, eps); works on (..., dim) arrays."""
    if state.count < 2:
        raise NormalizerNotReadyError(f"Normalizer has {state.count} sample(s), need >= 2")
    return (np.asarray(obs, dtype=np.float64) - state.mean) / state.scale


def denormalize(state: NormalizerState, obs: np.ndarray) -> np.ndarray:
    if state.count < 2:
        raise NormalizerNotReadyError(f"Normalizer has {state.count} sample(s), need >= 2")
    return np.asarray(obs, dtype=np.float64) * state.scale + state.mean


def observation_box(
    state: NormalizerState,
    users: Sequence[int],
    delta: float,
    num_antennas: int,
) -> BoxBounds:
    """[mean - delta*std, mean + delta*std] over the blocks of ``users`` (raw units)."""
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    dims = user_dims(users, num_antennas)
    mean = state.mean[dims]
    radius = delta * state.std[dims]
    return BoxBounds(lower=mean - radius, upper=mean + radius)

"""
Uniform replay buffer.

Stores raw (unnormalized) observations; the trainer normalizes a sampled
batch with the normalizer statistics current at sampling time.
"""

from dataclasses import dataclass

import numpy as np


@dataclass
class Transition:
    obs: np.ndarray
    proto: np.ndarray
    reward: float
    next_obs: np.ndarray


@dataclass
class Batch:
    obs: np.ndarray
    protos: np.ndarray
    rewards: np.ndarray
    next_obs: np.ndarray

    def __len__(self) -> int:
        return self.rewards.shape[0]


class ReplayBuffer:
    """Fixed-capacity ring buffer; the oldest transition is overwritten first."""

    def __init__(self, capacity: int, obs_dim: int, proto_dim: int):
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self._obs = np.zeros((capacity, obs_dim))
        self._protos = np.zeros((capacity, proto_dim))
        self._rewards = np.zeros(capacity)
        self._next_obs = np.zeros((capacity, obs_dim))
        self._cursor = 0
        self._size = 0

    def add(self, transition: Transition) -> None:
        i = self._cursor
        self._obs[i] = transition.obs
        self._protos[i] = transition.proto
        self._rewards[i] = transition.reward
        self._next_obs[i] = transition.next_obs
        self._cursor = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, batch_size: int, rng: np.random.Generator) -> Batch:
        """Uniform sample with replacement."""
        if self._size == 0:
            raise ValueError("Cannot sample from an empty replay buffer")
        idx = rng.integers(0, self._size, size=batch_size)
        return Batch(
            obs=self._obs[idx].copy(),
            protos=self._protos[idx].copy(),
            rewards=self._rewards[idx].copy(),
            next_obs=self._next_obs[idx].copy(),
        )

    def __len__(self) -> int:
        return self._size

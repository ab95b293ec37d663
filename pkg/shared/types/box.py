"""Axis-aligned input boxes."""

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class BoxBounds:
    """Per-dimension interval ``[lower, upper]``; concrete dims have zero width."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=np.float64)
        upper = np.asarray(self.upper, dtype=np.float64)
        if lower.shape != upper.shape:
            raise ValueError(f"Box bounds shape mismatch: {lower.shape} vs {upper.shape}")
        if np.any(lower > upper):
            raise ValueError("Box lower bound exceeds upper bound")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def point(cls, x: np.ndarray) -> "BoxBounds":
        x = np.asarray(x, dtype=np.float64)
        return cls(lower=x.copy(), upper=x.copy())

    @classmethod
    def around(cls, center: np.ndarray, radius) -> "BoxBounds":
        center = np.asarray(center, dtype=np.float64)
        radius = np.abs(np.broadcast_to(np.asarray(radius, dtype=np.float64), center.shape))
        return cls(lower=center - radius, upper=center + radius)

    @property
    def dim(self) -> int:
        return self.lower.shape[-1]

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def concrete_mask(self) -> np.ndarray:
        return self.lower == self.upper

    def contains(self, x: np.ndarray, tol: float = 0.0) -> bool:
        x = np.asarray(x)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """``n`` uniform points, shape (n, dim)."""
        return rng.uniform(self.lower, self.upper, size=(n,) + self.lower.shape)

    def select(self, dims: Sequence[int]) -> "BoxBounds":
        dims = list(dims)
        return BoxBounds(lower=self.lower[..., dims], upper=self.upper[..., dims])

    def concat(self, other: "BoxBounds") -> "BoxBounds":
        return BoxBounds(
            lower=np.concatenate([self.lower, other.lower], axis=-1),
            upper=np.concatenate([self.upper, other.upper], axis=-1),
        )

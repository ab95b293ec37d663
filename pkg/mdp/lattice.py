"""
Proto-action lattice.

The unit cube [0, 1]^D is split into n equidistant points per dimension with
n = ceil(|A|^(1/D)). The first |A| lattice points in lexicographic order carry
the actions; surplus points are never returned by ``knn``.
"""

from dataclasses import dataclass
from itertools import islice, product
from typing import List, Tuple

import numpy as np


def points_per_dim(count: int, dims: int) -> int:
    """Smallest n with n**dims >= count (integer arithmetic)."""
    n = max(1, int(round(count ** (1.0 / dims))))
    while n ** dims < count:
        n += 1
    while n > 1 and (n - 1) ** dims >= count:
        n -= 1
    return n


@dataclass(frozen=True)
class ProtoLattice:
    dims: int
    points_per_dim: int
    action_count: int
    points: np.ndarray  # (action_count, dims), row a is the point of action a

    def point(self, action: int) -> np.ndarray:
        return self.points[action]


def build_lattice(action_count: int, dims: int) -> ProtoLattice:
    if dims < 1 or action_count < 1:
        raise ValueError(f"Need dims >= 1 and action_count >= 1, got {dims}, {action_count}")
    n = points_per_dim(action_count, dims)
    coords = np.arange(n) / (n - 1) if n >= 2 else np.array([0.5])
    grid = list(islice(product(range(n), repeat=dims), action_count))
    points = coords[np.array(grid, dtype=int)]
    points.setflags(write=False)
    return ProtoLattice(dims=dims, points_per_dim=n, action_count=action_count, points=points)


def knn(lattice: ProtoLattice, u: np.ndarray, k: int) -> List[Tuple[int, float]]:
    """Nearest assigned actions to ``u`` by Euclidean distance, ties to the smaller index."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    u = np.asarray(u, dtype=np.float64)
    dist = np.linalg.norm(lattice.points - u, axis=1)
    order = np.argsort(dist, kind="stable")[: min(k, lattice.action_count)]
    return [(int(a), float(dist[a])) for a in order]

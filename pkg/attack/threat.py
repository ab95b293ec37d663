"""
Grey-box threat model.

The attacker knows the trained networks and the observation normalizer, but
only interval bounds of victim observations: mean +/- delta_vic * std. Its
own observation block may be set anywhere within mean +/- delta_adv * std.
All boxes here are in raw observation units; ``network_box`` maps them to
the normalized coordinates the networks consume.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple
import json
import logging
from pathlib import Path

import numpy as np

from agents.policy import actor_mean_head
from ndiff.mlp import MlpParams
from mdp.actions import selection_matrix
from mdp.lattice import ProtoLattice
from mdp.normalizer import NormalizerState, normalize
from mdp.observation import csi_dims, observation_dim, rate_dims, user_dims
from polytope.bounds import propagate_bounds
from shared.types import BoxBounds


logger = logging.getLogger(__name__)

PROTO_TOLERANCE = 1e-9


class AttackContractError(ValueError):
    """Inputs of an attack are inconsistent with its preconditions."""
    pass


@dataclass(frozen=True)
class ThreatModel:
    num_users: int
    num_antennas: int
    max_selected: int
    adversaries: Tuple[int, ...]
    delta_adv: float
    delta_vic: float
    normalizer: NormalizerState
    falsify_rate_dims: bool = False

    def __post_init__(self):
        adv = tuple(sorted(int(a) for a in self.adversaries))
        if len(set(adv)) != len(adv):
            raise AttackContractError(f"Duplicate adversaries in {self.adversaries}")
        if any(a < 0 or a >= self.num_users for a in adv):
            raise AttackContractError(f"Adversaries {adv} outside 0..{self.num_users - 1}")
        if self.delta_adv < 0 or self.delta_vic < 0:
            raise AttackContractError("Bound widths delta_adv and delta_vic must be >= 0")
        if self.normalizer.dim != self.obs_dim:
            raise AttackContractError(
                f"Normalizer covers {self.normalizer.dim} dims, observation has {self.obs_dim}"
            )
        if self.normalizer.count < 2:
            raise AttackContractError("Threat model needs normalizer statistics from >= 2 samples")
        object.__setattr__(self, "adversaries", adv)

    @property
    def victims(self) -> Tuple[int, ...]:
        return tuple(u for u in range(self.num_users) if u not in self.adversaries)

    @property
    def obs_dim(self) -> int:
        return observation_dim(self.num_users, self.num_antennas)

    @property
    def adversary_dims(self) -> List[int]:
        return user_dims(self.adversaries, self.num_antennas)

    @property
    def victim_dims(self) -> List[int]:
        return user_dims(self.victims, self.num_antennas)

    @property
    def controlled_dims(self) -> List[int]:
        """Observation dims the attacker optimizes."""
        dims = csi_dims(self.adversaries, self.num_antennas)
        if self.falsify_rate_dims:
            dims = sorted(dims + rate_dims(self.adversaries, self.num_antennas))
        return dims

    def clip_box(self) -> BoxBounds:
        """Raw-unit bounds of the controlled dims."""
        dims = self.controlled_dims
        return BoxBounds.around(self.normalizer.mean[dims], self.delta_adv * self.normalizer.std[dims])

    def normalized_radius(self, dims: Sequence[int], delta: float) -> np.ndarray:
        dims = list(dims)
        return delta * self.normalizer.std[dims] / self.normalizer.scale[dims]


def build_attack_box(threat: ThreatModel, o_adv: np.ndarray) -> BoxBounds:
    """Full observation box: adversary blocks fixed to ``o_adv``, victims at mean +/- delta_vic std."""
    adv_dims = threat.adversary_dims
    o_adv = np.asarray(o_adv, dtype=np.float64)
    if o_adv.shape != (len(adv_dims),):
        raise AttackContractError(
            f"o_adv has shape {o_adv.shape}, adversary blocks need ({len(adv_dims)},)"
        )
    mean, std = threat.normalizer.mean, threat.normalizer.std
    lower = np.empty(threat.obs_dim)
    upper = np.empty(threat.obs_dim)
    vic = threat.victim_dims
    lower[vic] = mean[vic] - threat.delta_vic * std[vic]
    upper[vic] = mean[vic] + threat.delta_vic * std[vic]
    lower[adv_dims] = o_adv
    upper[adv_dims] = o_adv
    return BoxBounds(lower=lower, upper=upper)


def network_box(threat: ThreatModel, box: BoxBounds) -> BoxBounds:
    """The raw box in normalized coordinates (normalization is increasing)."""
    return BoxBounds(lower=normalize(threat.normalizer, box.lower), upper=normalize(threat.normalizer, box.upper))


def victim_actions(num_users: int, max_selected: int, victims: Sequence[int]) -> Tuple[int, ...]:
    """Actions whose user subset contains at least one victim."""
    victims = list(victims)
    if not victims:
        raise AttackContractError("Victim set must be non-empty")
    mask = selection_matrix(num_users, max_selected)[:, victims].any(axis=1)
    return tuple(int(a) for a in np.flatnonzero(mask))


def protos_within(
    lattice: ProtoLattice,
    actions: Sequence[int],
    lower: np.ndarray,
    upper: np.ndarray,
) -> Tuple[Tuple[int, ...], np.ndarray]:
    """Subset of ``actions`` whose lattice point lies in [lower, upper]; all of them if none does."""
    actions = tuple(actions)
    points = lattice.points[list(actions)]
    inside = np.all((points >= lower - PROTO_TOLERANCE) & (points <= upper + PROTO_TOLERANCE), axis=1)
    if not np.any(inside):
        logger.debug("No victim lattice point inside the proto bounds; attacking all victim actions")
        return actions, points.copy()
    kept = tuple(a for a, keep in zip(actions, inside) if keep)
    return kept, points[inside].copy()


def reachable_victim_protos(
    actor: MlpParams,
    box: BoxBounds,
    lattice: ProtoLattice,
    actions: Sequence[int],
) -> Tuple[Tuple[int, ...], np.ndarray]:
    """Victim actions whose lattice point the greedy actor can reach over ``box`` (normalized)."""
    bounds = propagate_bounds(actor_mean_head(actor), box)
    return protos_within(lattice, actions, bounds.lower, bounds.upper)


@dataclass
class AttackResult:
    """Outcome of one attack run; ``o_adv`` holds full adversary blocks in raw units."""

    scheme: str
    adversaries: Tuple[int, ...]
    o_adv: np.ndarray
    best_objective: float
    best_restart: int
    objective_traces: List[List[float]] = field(default_factory=list)
    raw_traces: List[List[float]] = field(default_factory=list)
    attacked_actions: Tuple[int, ...] = ()
    wall_time_s: float = 0.0
    metadata: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self, include_timing: bool = False) -> Dict[str, Any]:
        data = {
            "scheme": self.scheme,
            "adversaries": list(self.adversaries),
            "o_adv": [float(v) for v in self.o_adv],
            "best_objective": float(self.best_objective),
            "best_restart": int(self.best_restart),
            "objective_traces": [[float(v) for v in t] for t in self.objective_traces],
            "raw_traces": [[float(v) for v in t] for t in self.raw_traces],
            "attacked_actions": list(self.attacked_actions),
            "metadata": self.metadata,
        }
        if include_timing:
            data["wall_time_s"] = self.wall_time_s
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "AttackResult":
        return cls(
            scheme=data["scheme"],
            adversaries=tuple(data["adversaries"]),
            o_adv=np.asarray(data["o_adv"], dtype=np.float64),
            best_objective=float(data["best_objective"]),
            best_restart=int(data["best_restart"]),
            objective_traces=[list(t) for t in data.get("objective_traces", [])],
            raw_traces=[list(t) for t in data.get("raw_traces", [])],
            attacked_actions=tuple(data.get("attacked_actions", ())),
            wall_time_s=float(data.get("wall_time_s", 0.0)),
            metadata=dict(data.get("metadata", {})),
        )

    def save_json(self, path: Path, include_timing: bool = False) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(include_timing), indent=2, sort_keys=True))
        return path

    @classmethod
    def load_json(cls, path: Path) -> "AttackResult":
        return cls.from_dict(json.loads(Path(path).read_text()))


def check_networks(actor: MlpParams, critic: MlpParams, threat: ThreatModel) -> int:
    """Validate network widths against the threat layout; returns D."""
    if actor.input_dim != threat.obs_dim:
        raise AttackContractError(f"Actor expects {actor.input_dim} inputs, observation has {threat.obs_dim}")
    if actor.output_dim % 2:
        raise AttackContractError("Actor output must hold a mean and a log-std per proto dimension")
    proto_dims = actor.output_dim // 2
    if critic.input_dim != threat.obs_dim + proto_dims or critic.output_dim != 1:
        raise AttackContractError(
            f"Critic expects {critic.input_dim} inputs / {critic.output_dim} outputs, "
            f"need {threat.obs_dim + proto_dims} / 1"
        )
    return proto_dims


def raw_adversary_blocks(threat: ThreatModel, z: np.ndarray) -> np.ndarray:
    """Map normalized controlled values back to raw adversary blocks, clipped to the raw box.

    Uncontrolled entries hold the normalizer mean, the same point the bound
    optimization assumed for them. During evaluation only the CSI columns are
    injected; the base station recomputes gamma from the reported CSI and
    reads the adversaries' true R.
    """
    adv_dims = threat.adversary_dims
    ctrl = threat.controlled_dims
    mean, std, scale = threat.normalizer.mean, threat.normalizer.std, threat.normalizer.scale
    full = mean.copy()
    full[ctrl] = mean[ctrl] + np.asarray(z) * scale[ctrl]
    lo = mean[ctrl] - threat.delta_adv * std[ctrl]
    hi = mean[ctrl] + threat.delta_adv * std[ctrl]
    full[ctrl] = np.clip(full[ctrl], lo, hi)
    return full[adv_dims]


def pick_best_restart(finals: Sequence[float]) -> int:
    return int(np.argmin(np.asarray(finals)))


"""
Falsified-gradient attack on the trained critic.

The adversaries pick their observation blocks so that an upper bound of
critic #1, taken over every victim observation in the threat box, is as
small as possible for the victim actions the greedy actor can still reach.
The bound comes from backward linear propagation and is differentiated with
respect to the adversary coordinates; Adam steps are clipped back into the
adversary box after every update. Optimization runs in normalized
coordinates.
"""

from typing import List, Sequence, Tuple
import logging
import time

import numpy as np

from ndiff import graph as G
from ndiff.adam import AdamState, adam_step
from ndiff.mlp import MlpParams
from mdp.actions import action_count
from mdp.lattice import ProtoLattice, build_lattice
from polytope.bounds import bounds_graph, upper_bound_value_and_gradient
from shared.types import BoxBounds
from .threat import (
    AttackContractError,
    AttackResult,
    ThreatModel,
    check_networks,
    pick_best_restart,
    raw_adversary_blocks,
    reachable_victim_protos,
    victim_actions,
)


logger = logging.getLogger(__name__)

AGGREGATIONS = ("max", "sum")


class _BoundObjective:
    """J(z) over the normalized controlled coordinates z."""

    def __init__(
        self,
        actor: MlpParams,
        critic: MlpParams,
        threat: ThreatModel,
        lattice: ProtoLattice,
        actions: Sequence[int],
        aggregation: str,
        detach_intermediate: bool,
        chunk_size: int,
    ):
        self.actor = actor
        self.critic = critic
        self.lattice = lattice
        self.actions = tuple(actions)
        self.aggregation = aggregation
        self.detach_intermediate = detach_intermediate
        self.chunk_size = chunk_size
        self.controlled = threat.controlled_dims

        # Victims span +/- delta_vic std; adversary dims not under control sit at the mean (0).
        radius = np.zeros(threat.obs_dim)
        radius[threat.victim_dims] = threat.normalized_radius(threat.victim_dims, threat.delta_vic)
        self._lower = -radius
        self._upper = radius.copy()

    def obs_box(self, z: np.ndarray) -> BoxBounds:
        lower, upper = self._lower.copy(), self._upper.copy()
        lower[self.controlled] = z
        upper[self.controlled] = z
        return BoxBounds(lower=lower, upper=upper)

    def critic_boxes(self, z: np.ndarray) -> Tuple[Tuple[int, ...], BoxBounds]:
        box = self.obs_box(z)
        actions, protos = reachable_victim_protos(self.actor, box, self.lattice, self.actions)
        k = protos.shape[0]
        lower = np.concatenate([np.broadcast_to(box.lower, (k, box.dim)), protos], axis=1)
        upper = np.concatenate([np.broadcast_to(box.upper, (k, box.dim)), protos], axis=1)
        return actions, BoxBounds(lower=lower, upper=upper)

    def _chunks(self, count: int):
        for start in range(0, count, self.chunk_size):
            yield slice(start, min(start + self.chunk_size, count))

    def upper_bounds(self, boxes: BoxBounds) -> np.ndarray:
        """q-bar for every row of a batched box, no tape kept."""
        values: List[np.ndarray] = []
        for part in self._chunks(boxes.lower.shape[0]):
            res = bounds_graph(
                self.critic,
                G.constant(boxes.lower[part]),
                G.constant(boxes.upper[part]),
                output_rows=[0],
                detach_intermediate=self.detach_intermediate,
                need_lower=False,
            )
            values.append(res["upper"].value[..., 0])
        return np.concatenate(values)

    def _gradient(self, boxes: BoxBounds) -> Tuple[np.ndarray, np.ndarray]:
        dims = self.controlled
        values, grads = [], []
        for part in self._chunks(boxes.lower.shape[0]):
            v, g = upper_bound_value_and_gradient(
                self.critic,
                BoxBounds(lower=boxes.lower[part], upper=boxes.upper[part]),
                dims,
                0,
                detach_intermediate=self.detach_intermediate,
            )
            values.append(v)
            grads.append(g)
        return np.concatenate(values), np.concatenate(grads, axis=0)

    def value(self, z: np.ndarray) -> float:
        _, boxes = self.critic_boxes(z)
        q_bar = self.upper_bounds(boxes)
        return float(q_bar.max() if self.aggregation == "max" else q_bar.sum())

    def value_and_gradient(self, z: np.ndarray) -> Tuple[float, np.ndarray]:
        _, boxes = self.critic_boxes(z)
        if self.aggregation == "max":
            q_bar = self.upper_bounds(boxes)
            top = int(np.argmax(q_bar))
            _, grad = self._gradient(
                BoxBounds(lower=boxes.lower[top:top + 1], upper=boxes.upper[top:top + 1])
            )
            return float(q_bar[top]), grad[0]
        q_bar, grads = self._gradient(boxes)
        return float(q_bar.sum()), grads.sum(axis=0)


def fggm(
    actor: MlpParams,
    critic: MlpParams,
    threat: ThreatModel,
    *,
    restarts: int = 10,
    iterations: int = 300,
    step_size: float = 0.05,
    seed: int = 0,
    aggregation: str = "max",
    detach_intermediate: bool = False,
    chunk_size: int = 32,
) -> AttackResult:
    """Minimize the victim critic upper bound; returns the best restart.

    Each restart r starts from a uniform draw in the adversary box seeded with
    ``seed + r``. The objective is evaluated ``iterations + 1`` times per
    restart; traces record the best value seen so far.
    """
    if aggregation not in AGGREGATIONS:
        raise AttackContractError(f"aggregation must be one of {AGGREGATIONS}, got {aggregation!r}")
    if restarts < 1 or iterations < 0:
        raise AttackContractError("FGGM needs restarts >= 1 and iterations >= 0")
    if chunk_size < 1:
        raise AttackContractError(f"chunk_size must be >= 1, got {chunk_size}")
    proto_dims = check_networks(actor, critic, threat)
    actions = victim_actions(threat.num_users, threat.max_selected, threat.victims)
    lattice = build_lattice(action_count(threat.num_users, threat.max_selected), proto_dims)
    objective = _BoundObjective(
        actor, critic, threat, lattice, actions, aggregation, detach_intermediate, chunk_size
    )
    radius = threat.normalized_radius(threat.controlled_dims, threat.delta_adv)
    logger.info(
        f"FGGM: {len(threat.adversaries)} adversaries, {len(actions)} victim actions, "
        f"{restarts} restarts x {iterations} iterations, aggregation={aggregation}"
    )

    started = time.perf_counter()
    finals: List[float] = []
    best_points: List[np.ndarray] = []
    raw_traces: List[List[float]] = []
    best_traces: List[List[float]] = []
    for restart in range(restarts):
        rng = np.random.default_rng(seed + restart)
        z = rng.uniform(-radius, radius)
        opt = AdamState.for_params([z], lr=step_size)
        raw: List[float] = []
        best_value, best_z = np.inf, z.copy()
        for _ in range(iterations):
            value, grad = objective.value_and_gradient(z)
            raw.append(value)
            if value < best_value:
                best_value, best_z = value, z.copy()
            (z,), opt = adam_step(opt, [z], [grad])
            z = np.clip(z, -radius, radius)
        value = objective.value(z)
        raw.append(value)
        if value < best_value:
            best_value, best_z = value, z.copy()

        raw_traces.append(raw)
        best_traces.append(np.minimum.accumulate(raw).tolist())
        finals.append(best_value)
        best_points.append(best_z)
        logger.debug(f"FGGM restart {restart}: best objective {best_value:.6f}")

    best = pick_best_restart(finals)
    attacked, _ = objective.critic_boxes(best_points[best])
    result = AttackResult(
        scheme="fggm",
        adversaries=threat.adversaries,
        o_adv=raw_adversary_blocks(threat, best_points[best]),
        best_objective=finals[best],
        best_restart=best,
        objective_traces=best_traces,
        raw_traces=raw_traces,
        attacked_actions=attacked,
        wall_time_s=time.perf_counter() - started,
        metadata={
            "aggregation": aggregation,
            "restarts": restarts,
            "iterations": iterations,
            "step_size": step_size,
            "seed": seed,
            "delta_adv": threat.delta_adv,
            "delta_vic": threat.delta_vic,
            "detach_intermediate": detach_intermediate,
            "falsify_rate_dims": threat.falsify_rate_dims,
        },
    )
    logger.info(f"FGGM done: best objective {result.best_objective:.6f} (restart {best})")
    return result


def attack_upper_bounds(
    actor: MlpParams,
    critic: MlpParams,
    threat: ThreatModel,
    o_adv: np.ndarray,
) -> Tuple[Tuple[int, ...], np.ndarray, np.ndarray]:
    """(attacked actions, their lattice points, q-bar) for raw adversary blocks ``o_adv``."""
    proto_dims = check_networks(actor, critic, threat)
    actions = victim_actions(threat.num_users, threat.max_selected, threat.victims)
    lattice = build_lattice(action_count(threat.num_users, threat.max_selected), proto_dims)
    objective = _BoundObjective(actor, critic, threat, lattice, actions, "max", False, 32)
    adv_index = {d: i for i, d in enumerate(threat.adversary_dims)}
    ctrl = threat.controlled_dims
    raw = np.asarray(o_adv, dtype=np.float64)[[adv_index[d] for d in ctrl]]
    z = (raw - threat.normalizer.mean[ctrl]) / threat.normalizer.scale[ctrl]
    attacked, boxes = objective.critic_boxes(z)
    return attacked, lattice.points[list(attacked)].copy(), objective.upper_bounds(boxes)

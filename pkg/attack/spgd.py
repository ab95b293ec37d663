"""
Sampled projected gradient descent baseline.

Victim observations are replaced by a fixed set of uniform samples from the
threat box; the objective is the largest exact critic #1 value over samples
and reachable victim protos. Reachable protos are the victim lattice points
inside the bounding box of the actor's greedy protos on the samples. Steps
follow the sign of the gradient and are clipped to the adversary box.
"""

from typing import List, Sequence, Tuple
import logging
import time

import numpy as np

from ndiff import graph as G
from ndiff.mlp import MlpParams, as_constants, forward_graph, forward_mlp
from mdp.actions import action_count
from mdp.lattice import ProtoLattice, build_lattice
from agents.policy import greedy_proto
from .fggm import AGGREGATIONS
from .threat import (
    AttackContractError,
    AttackResult,
    ThreatModel,
    check_networks,
    pick_best_restart,
    protos_within,
    raw_adversary_blocks,
    victim_actions,
)


logger = logging.getLogger(__name__)


class _SampledObjective:
    def __init__(
        self,
        actor: MlpParams,
        critic: MlpParams,
        threat: ThreatModel,
        lattice: ProtoLattice,
        actions: Sequence[int],
        samples: np.ndarray,
        aggregation: str,
    ):
        self.actor = actor
        self.critic = critic
        self.lattice = lattice
        self.actions = tuple(actions)
        self.aggregation = aggregation
        self.controlled = threat.controlled_dims
        self._base = np.zeros((samples.shape[0], threat.obs_dim))
        self._base[:, threat.victim_dims] = samples

    def observations(self, z: np.ndarray) -> np.ndarray:
        obs = self._base.copy()
        obs[:, self.controlled] = z
        return obs

    def reachable(self, obs: np.ndarray) -> Tuple[Tuple[int, ...], np.ndarray]:
        protos = greedy_proto(self.actor, obs)
        return protos_within(self.lattice, self.actions, protos.min(axis=0), protos.max(axis=0))

    def q_table(self, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray, Tuple[int, ...]]:
        """Critic #1 values, shape (samples, protos)."""
        obs = self.observations(z)
        actions, protos = self.reachable(obs)
        s, k = obs.shape[0], protos.shape[0]
        inputs = np.concatenate(
            [np.repeat(obs, k, axis=0), np.tile(protos, (s, 1))], axis=1
        )
        q = forward_mlp(self.critic, inputs)[:, 0].reshape(s, k)
        return q, protos, actions

    def _aggregate(self, q: np.ndarray) -> float:
        return float(q.max() if self.aggregation == "max" else q.max(axis=0).sum())

    def value(self, z: np.ndarray) -> float:
        q, _, _ = self.q_table(z)
        return self._aggregate(q)

    def value_and_gradient(self, z: np.ndarray) -> Tuple[float, np.ndarray]:
        q, protos, _ = self.q_table(z)
        obs = self.observations(z)
        if self.aggregation == "max":
            s, i = np.unravel_index(int(np.argmax(q)), q.shape)
            rows = [(int(s), int(i))]
        else:
            rows = [(int(np.argmax(q[:, i])), i) for i in range(q.shape[1])]

        x = G.variable(np.asarray(z, dtype=np.float64))
        fixed = np.stack([np.concatenate([obs[s], protos[i]]) for s, i in rows])
        fixed[:, self.controlled] = 0.0
        scatter = np.zeros((len(self.controlled), fixed.shape[1]))
        scatter[np.arange(len(self.controlled)), self.controlled] = 1.0
        inputs = G.add(fixed, G.matmul(x, scatter))
        total = G.sum_(forward_graph(as_constants(self.critic), inputs))
        G.backward(total)
        return self._aggregate(q), x.grad


def spgd(
    actor: MlpParams,
    critic: MlpParams,
    threat: ThreatModel,
    *,
    num_samples: int = 100,
    restarts: int = 10,
    iterations: int = 300,
    step_size: float = 0.05,
    seed: int = 0,
    aggregation: str = "max",
) -> AttackResult:
    """Sign-gradient attack against sampled victim observations."""
    if aggregation not in AGGREGATIONS:
        raise AttackContractError(f"aggregation must be one of {AGGREGATIONS}, got {aggregation!r}")
    if num_samples < 1 or restarts < 1 or iterations < 0:
        raise AttackContractError("SPGD needs num_samples >= 1, restarts >= 1 and iterations >= 0")
    proto_dims = check_networks(actor, critic, threat)
    actions = victim_actions(threat.num_users, threat.max_selected, threat.victims)
    lattice = build_lattice(action_count(threat.num_users, threat.max_selected), proto_dims)

    (sample_seq,) = np.random.SeedSequence(seed).spawn(1)
    vic_radius = threat.normalized_radius(threat.victim_dims, threat.delta_vic)
    samples = np.random.default_rng(sample_seq).uniform(
        -vic_radius, vic_radius, size=(num_samples, vic_radius.shape[0])
    )
    objective = _SampledObjective(actor, critic, threat, lattice, actions, samples, aggregation)
    radius = threat.normalized_radius(threat.controlled_dims, threat.delta_adv)
    logger.info(
        f"SPGD: {num_samples} victim samples, {restarts} restarts x {iterations} iterations"
    )

    started = time.perf_counter()
    finals: List[float] = []
    best_points: List[np.ndarray] = []
    raw_traces: List[List[float]] = []
    best_traces: List[List[float]] = []
    for restart in range(restarts):
        rng = np.random.default_rng(seed + restart)
        z = rng.uniform(-radius, radius)
        raw: List[float] = []
        best_value, best_z = np.inf, z.copy()
        for _ in range(iterations):
            value, grad = objective.value_and_gradient(z)
            raw.append(value)
            if value < best_value:
                best_value, best_z = value, z.copy()
            z = np.clip(z - step_size * np.sign(grad), -radius, radius)
        value = objective.value(z)
        raw.append(value)
        if value < best_value:
            best_value, best_z = value, z.copy()
        raw_traces.append(raw)
        best_traces.append(np.minimum.accumulate(raw).tolist())
        finals.append(best_value)
        best_points.append(best_z)

    best = pick_best_restart(finals)
    _, _, attacked = objective.q_table(best_points[best])
    return AttackResult(
        scheme="spgd",
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
            "samples": num_samples,
            "restarts": restarts,
            "iterations": iterations,
            "step_size": step_size,
            "seed": seed,
            "delta_adv": threat.delta_adv,
            "delta_vic": threat.delta_vic,
        },
    )

"""
Soft actor-critic training of the Wolpertinger scheduler.

Twin critics with target copies (Polyak averaging), a tanh-squashed Gaussian
actor rescaled to [0, 1]^D, and optional automatic temperature tuning toward
entropy -D. Transitions store the lattice point of the executed action.
"""

from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Optional, Protocol, Sequence, Tuple
import logging

import numpy as np

from ndiff import graph as G
from ndiff.adam import AdamState, adam_step
from ndiff.graph import Tensor
from ndiff.mlp import (
    MlpParams,
    as_constants,
    as_variables,
    forward_graph,
    forward_mlp,
    gradients_of,
    init_mlp,
)
from mdp.actions import action_count
from mdp.env import EnvState, observe, step as env_step
from mdp.lattice import build_lattice
from mdp.normalizer import NormalizerState, normalize, normalizer_update
from shared.schemas.environment import EnvConfig
from .checkpoint import Checkpoint
from .config import SacConfig
from .policy import LOG_STD_MAX, LOG_STD_MIN, select_action, squash, squash_log_det, split_actor_output
from .replay import Batch, ReplayBuffer, Transition


logger = logging.getLogger(__name__)

EnvFactory = Callable[[int], EnvState]
_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


class StepLogger(Protocol):
    def log_step(self, step: int, episode: int, reward: float, losses: Dict[str, float]) -> None: ...


class TrainingDivergedError(RuntimeError):
    """A loss became NaN or infinite."""

    def __init__(self, step: int, losses: Dict[str, float]):
        self.step = step
        self.losses = losses
        super().__init__(f"Training diverged at step {step}: {losses}")


@dataclass(frozen=True)
class SacNetworks:
    actor: MlpParams
    critic_1: MlpParams
    critic_2: MlpParams
    target_1: MlpParams
    target_2: MlpParams
    log_temperature: float
    actor_opt: AdamState
    critic_opt: AdamState
    temperature_opt: AdamState

    @property
    def temperature(self) -> float:
        return float(np.exp(self.log_temperature))


def init_networks(obs_dim: int, config: SacConfig, rng: np.random.Generator) -> SacNetworks:
    d = config.proto_dims
    actor = init_mlp([obs_dim, *config.actor_hidden, 2 * d], rng)
    critic_1 = init_mlp([obs_dim + d, *config.critic_hidden, 1], rng)
    critic_2 = init_mlp([obs_dim + d, *config.critic_hidden, 1], rng)
    log_temperature = float(np.log(max(config.initial_temperature, 1e-12)))
    return SacNetworks(
        actor=actor,
        critic_1=critic_1,
        critic_2=critic_2,
        target_1=critic_1,
        target_2=critic_2,
        log_temperature=log_temperature,
        actor_opt=AdamState.for_params(actor.arrays(), lr=config.actor_lr),
        critic_opt=AdamState.for_params(critic_1.arrays() + critic_2.arrays(), lr=config.critic_lr),
        temperature_opt=AdamState.for_params([np.zeros(1)], lr=config.temperature_lr),
    )


def _sample_squashed(
    actor_out: Tensor, proto_dims: int, noise: np.ndarray
) -> Tuple[Tensor, Tensor]:
    """Reparameterized sample u and its log-density log pi(u)."""
    mean = G.take(actor_out, (slice(None), slice(0, proto_dims)))
    log_std = G.clip(
        G.take(actor_out, (slice(None), slice(proto_dims, 2 * proto_dims))), LOG_STD_MIN, LOG_STD_MAX
    )
    z = G.add(mean, G.mul(G.exp(log_std), noise))
    gauss = G.sub(G.sub(-0.5 * noise * noise, log_std), _HALF_LOG_2PI)
    logp = G.sum_(G.sub(gauss, squash_log_det(z)), axis=-1)
    return squash(z), logp


def _q_graph(critic, obs: np.ndarray, protos) -> Tensor:
    q = forward_graph(critic, G.concat([G.as_tensor(obs), protos], axis=-1))
    return G.sum_(q, axis=-1)


def actor_loss_graph(
    actor_weights,
    critics: Sequence[MlpParams],
    obs: np.ndarray,
    noise: np.ndarray,
    temperature: float,
) -> Tuple[Tensor, Tensor]:
    """mean(alpha * log pi(u) - min_i Q_i(o, u)) with u reparameterized; returns (loss, logp)."""
    proto_dims = noise.shape[-1]
    out = forward_graph(actor_weights, obs)
    u, logp = _sample_squashed(out, proto_dims, noise)
    q1 = _q_graph(as_constants(critics[0]), obs, u)
    q2 = _q_graph(as_constants(critics[1]), obs, u)
    loss = G.mean(G.sub(G.mul(logp, temperature), G.minimum(q1, q2)))
    return loss, logp


def _polyak(target: MlpParams, source: MlpParams, tau: float) -> MlpParams:
    arrays = [tau * s + (1.0 - tau) * t for t, s in zip(target.arrays(), source.arrays())]
    return MlpParams.from_arrays(arrays, target.output_activation)


def sac_update(
    batch: Batch,
    nets: SacNetworks,
    config: SacConfig,
    rng: np.random.Generator,
) -> Tuple[SacNetworks, Dict[str, float]]:
    """One gradient step on critics, actor and temperature; ``batch`` is normalized."""
    if len(batch) == 0:
        raise ValueError("sac_update needs a non-empty batch")
    d = config.proto_dims
    alpha = nets.temperature

    # Critic targets
    next_mean, next_log_std = split_actor_output(forward_mlp(nets.actor, batch.next_obs), d)
    eps = rng.standard_normal(next_mean.shape)
    z_next = next_mean + np.exp(next_log_std) * eps
    next_u = squash(z_next)
    log_det = squash_log_det(G.constant(z_next)).value
    next_logp = np.sum(-0.5 * eps * eps - next_log_std - _HALF_LOG_2PI - log_det, axis=-1)
    next_in = np.concatenate([batch.next_obs, next_u], axis=1)
    next_q = np.minimum(forward_mlp(nets.target_1, next_in)[:, 0], forward_mlp(nets.target_2, next_in)[:, 0])
    targets = config.reward_scale * batch.rewards + config.discount * (next_q - alpha * next_logp)

    # Critic step
    c1, c2 = as_variables(nets.critic_1), as_variables(nets.critic_2)
    q1 = _q_graph(c1, batch.obs, batch.protos)
    q2 = _q_graph(c2, batch.obs, batch.protos)
    critic_loss = G.add(
        G.mean(G.square(G.sub(q1, targets))),
        G.mean(G.square(G.sub(q2, targets))),
    )
    G.backward(critic_loss)
    new_critics, critic_opt = adam_step(
        nets.critic_opt,
        nets.critic_1.arrays() + nets.critic_2.arrays(),
        gradients_of(c1) + gradients_of(c2),
    )
    split = len(nets.critic_1.arrays())
    critic_1 = MlpParams.from_arrays(new_critics[:split])
    critic_2 = MlpParams.from_arrays(new_critics[split:])

    # Actor step
    actor_vars = as_variables(nets.actor)
    noise = rng.standard_normal((len(batch), d))
    actor_loss, logp = actor_loss_graph(actor_vars, (critic_1, critic_2), batch.obs, noise, alpha)
    G.backward(actor_loss)
    new_actor, actor_opt = adam_step(nets.actor_opt, nets.actor.arrays(), gradients_of(actor_vars))
    actor = MlpParams.from_arrays(new_actor)

    # Temperature step: loss = -log_alpha * mean(logp + target)
    log_temperature = nets.log_temperature
    temperature_opt = nets.temperature_opt
    entropy_gap = float(np.mean(logp.value) + config.target_entropy)
    alpha_loss = -log_temperature * entropy_gap
    if config.temperature_mode == "auto":
        (new_log,), temperature_opt = adam_step(
            nets.temperature_opt, [np.array([log_temperature])], [np.array([-entropy_gap])]
        )
        log_temperature = float(new_log[0])

    updated = replace(
        nets,
        actor=actor,
        critic_1=critic_1,
        critic_2=critic_2,
        target_1=_polyak(nets.target_1, critic_1, config.tau),
        target_2=_polyak(nets.target_2, critic_2, config.tau),
        log_temperature=log_temperature,
        actor_opt=actor_opt,
        critic_opt=critic_opt,
        temperature_opt=temperature_opt,
    )
    losses = {
        "critic_loss": float(critic_loss.value),
        "actor_loss": float(actor_loss.value),
        "temperature_loss": float(alpha_loss),
        "temperature": float(np.exp(log_temperature)),
        "entropy": float(-np.mean(logp.value)),
    }
    return updated, losses


def normalize_batch(batch: Batch, normalizer: NormalizerState) -> Batch:
    return replace(batch, obs=normalize(normalizer, batch.obs), next_obs=normalize(normalizer, batch.next_obs))


def train(
    env_factory: EnvFactory,
    config: SacConfig,
    env_config: EnvConfig,
    tracker: Optional["StepLogger"] = None,
) -> Checkpoint:
    """Train from scratch; deterministic given ``config.seed``.

    ``env_factory(episode)`` must return a fresh environment whose trace holds
    at least ``episode_length + 1`` slots.
    """
    init_seq, explore_seq, update_seq = np.random.SeedSequence(config.seed).spawn(3)
    init_rng = np.random.default_rng(init_seq)
    explore_rng = np.random.default_rng(explore_seq)
    update_rng = np.random.default_rng(update_seq)

    num_actions = action_count(env_config.num_users, env_config.max_selected)
    lattice = build_lattice(num_actions, config.proto_dims)
    env = env_factory(0)
    obs = observe(env)
    obs_dim = obs.shape[0]

    nets = init_networks(obs_dim, config, init_rng)
    normalizer = NormalizerState.empty(obs_dim)
    replay = ReplayBuffer(config.replay_capacity, obs_dim, config.proto_dims)
    logger.info(
        f"Training SAC for {config.total_steps} steps: |A|={num_actions}, "
        f"D={config.proto_dims}, lattice n={lattice.points_per_dim}"
    )

    episode = 0
    episode_slot = 0
    window_rewards: List[float] = []
    losses: Dict[str, float] = {}
    for step_index in range(config.total_steps):
        if episode_slot >= config.episode_length:
            episode += 1
            episode_slot = 0
            env = env_factory(episode)
            obs = observe(env)

        normalizer = normalizer_update(normalizer, obs)
        if step_index < config.warmup_steps or normalizer.count < 2:
            action = int(explore_rng.integers(num_actions))
            proto = lattice.point(action).copy()
        else:
            action, proto = select_action(
                nets.actor,
                (nets.critic_1, nets.critic_2),
                lattice,
                normalize(normalizer, obs),
                config.knn_k,
                mode="explore",
                rng=explore_rng,
            )

        env, reward, _ = env_step(env, action)
        next_obs = observe(env)
        replay.add(Transition(obs=obs, proto=proto, reward=reward, next_obs=next_obs))
        window_rewards.append(reward)
        obs = next_obs
        episode_slot += 1

        if step_index >= config.warmup_steps and len(replay) >= config.batch_size:
            batch = normalize_batch(replay.sample(config.batch_size, update_rng), normalizer)
            nets, losses = sac_update(batch, nets, config, update_rng)
            if not all(np.isfinite(v) for v in losses.values()):
                raise TrainingDivergedError(step_index, losses)

        if (step_index + 1) % config.log_interval == 0:
            mean_reward = float(np.mean(window_rewards))
            window_rewards = []
            logger.info(
                f"step {step_index + 1}/{config.total_steps} episode {episode} "
                f"reward {mean_reward:.4f} critic_loss {losses.get('critic_loss', float('nan')):.4f}"
            )
            if tracker is not None:
                tracker.log_step(step_index + 1, episode, mean_reward, losses)

    return Checkpoint(
        actor=nets.actor,
        critic_1=nets.critic_1,
        critic_2=nets.critic_2,
        normalizer=normalizer,
        sac_config=config,
        env_config=env_config,
    )

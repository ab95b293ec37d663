"""
Test Fixtures and Configuration

Shared pytest fixtures for all tests. Networks are tiny and untrained; the
normalizer is fitted on a short generated trace so every fixture is
deterministic.
"""

import pytest
import numpy as np

from agents import Checkpoint, SacConfig, init_networks
from channel import ChannelConfig, generate_csi_trace
from mdp import NormalizerState, action_count, normalizer_update, observe, reset, step
from shared.schemas import EnvConfig, ExperimentConfig


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def small_env_config() -> EnvConfig:
    """L=4 users, M=2 antennas, N=2, D=2, k=3."""
    return EnvConfig(
        num_users=4,
        num_antennas=2,
        max_selected=2,
        proto_dims=2,
        knn_k=3,
    )


@pytest.fixture
def small_sac_config() -> SacConfig:
    return SacConfig(
        proto_dims=2,
        knn_k=3,
        actor_hidden=(8,),
        critic_hidden=(8, 8),
        replay_capacity=64,
        batch_size=8,
        total_steps=40,
        warmup_steps=10,
        episode_length=20,
        log_interval=20,
        seed=3,
    )


@pytest.fixture
def small_trace(small_env_config):
    config = ChannelConfig(
        num_antennas=small_env_config.num_antennas,
        num_users=small_env_config.num_users,
        seed=7,
    )
    return generate_csi_trace(config, 60)


@pytest.fixture
def fitted_normalizer(small_env_config, small_trace) -> NormalizerState:
    """Statistics of observations along the trace under a round-robin policy."""
    num_actions = action_count(small_env_config.num_users, small_env_config.max_selected)
    env = reset(small_env_config, small_trace)
    state = NormalizerState.empty(observe(env).shape[0])
    for t in range(len(small_trace)):
        state = normalizer_update(state, observe(env))
        env, _, _ = step(env, t % num_actions)
    return state


@pytest.fixture
def small_checkpoint(small_env_config, small_sac_config, fitted_normalizer) -> Checkpoint:
    """Untrained networks with trace statistics."""
    nets = init_networks(fitted_normalizer.dim, small_sac_config, np.random.default_rng(11))
    return Checkpoint(
        actor=nets.actor,
        critic_1=nets.critic_1,
        critic_2=nets.critic_2,
        normalizer=fitted_normalizer,
        sac_config=small_sac_config,
        env_config=small_env_config,
    )


@pytest.fixture
def small_experiment() -> ExperimentConfig:
    """Experiment sized to match ``small_checkpoint`` with a short attack budget."""
    return ExperimentConfig(
        name="test",
        num_users=4,
        num_antennas=2,
        max_selected=2,
        proto_dims=2,
        knn_k=3,
        num_slots=12,
        num_adversaries=2,
        restarts=2,
        iterations=3,
        samples=4,
        seed=5,
    )


@pytest.fixture
def checkpoint_file(tmp_path, small_checkpoint):
    return small_checkpoint.save(tmp_path / "checkpoint.fggm")

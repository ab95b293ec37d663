"""
Tests for the user-selection MDP: action codec, lattice, observations,
normalizer and the proportional-fair transition.
"""

from dataclasses import replace

import pytest
import numpy as np
from hypothesis import given, settings, strategies as st

from channel import ChannelConfig, channel_state, generate_csi_trace
from mdp import (
    RATE_EPSILON,
    RATE_FLOOR,
    STD_EPSILON,
    ActionCodecError,
    EnvDoneError,
    NormalizerNotReadyError,
    NormalizerState,
    action_count,
    all_subsets,
    block_size,
    build_lattice,
    build_observation,
    csi_dims,
    csi_from_blocks,
    decode_action,
    denormalize,
    encode_action,
    knn,
    normalize,
    normalizer_update,
    observation_box,
    observation_dim,
    observe,
    rate_dims,
    reset,
    selection_matrix,
    step,
    user_dims,
)
from mdp.lattice import points_per_dim
from shared.schemas import EnvConfig


@st.composite
def sizes_and_index(draw):
    num_users = draw(st.integers(min_value=1, max_value=12))
    max_selected = draw(st.integers(min_value=1, max_value=num_users))
    index = draw(st.integers(min_value=0, max_value=action_count(num_users, max_selected) - 1))
    return num_users, max_selected, index


@pytest.mark.unit
class TestActionCodec:
    """Test the index <-> subset bijection."""

    @pytest.mark.parametrize("num_users,max_selected,count", [(8, 4, 162), (16, 4, 2516), (1, 1, 1), (4, 2, 10)])
    def test_action_count(self, num_users, max_selected, count):
        assert action_count(num_users, max_selected) == count

    def test_known_indices(self):
        assert decode_action(0, 8, 4) == (0,)
        assert decode_action(7, 8, 4) == (7,)
        assert decode_action(8, 8, 4) == (0, 1)
        assert decode_action(161, 8, 4) == (4, 5, 6, 7)
        assert decode_action(9, 4, 2) == (2, 3)

    @given(sizes_and_index())
    @settings(max_examples=200, deadline=None)
    def test_decode_then_encode_is_identity(self, case):
        num_users, max_selected, index = case
        subset = decode_action(index, num_users, max_selected)
        assert list(subset) == sorted(set(subset))
        assert 1 <= len(subset) <= max_selected
        assert encode_action(subset, num_users, max_selected) == index

    def test_order_is_size_then_lexicographic(self):
        subsets = all_subsets(5, 3)
        keys = [(len(s), s) for s in subsets]
        assert keys == sorted(keys)
        assert len(set(subsets)) == action_count(5, 3)

    @pytest.mark.parametrize("index", [-1, 10])
    def test_out_of_range_index(self, index):
        with pytest.raises(ActionCodecError):
            decode_action(index, 4, 2)

    @pytest.mark.parametrize("subset", [(), (0, 1, 2), (1, 1), (2, 1), (4,)])
    def test_malformed_subset(self, subset):
        with pytest.raises(ActionCodecError):
            encode_action(subset, 4, 2)

    def test_n_larger_than_l_rejected(self):
        with pytest.raises(ActionCodecError):
            action_count(3, 4)

    def test_selection_matrix_rows(self):
        mask = selection_matrix(4, 2)
        assert mask.shape == (10, 4)
        np.testing.assert_array_equal(mask[9], [False, False, True, True])
        assert not mask.flags.writeable


@pytest.mark.unit
class TestLattice:
    """Test the proto-action lattice and nearest-neighbour lookup."""

    @pytest.mark.parametrize("count,dims,n", [(8, 3, 2), (162, 3, 6), (2516, 8, 3), (1, 3, 1), (9, 2, 3)])
    def test_points_per_dim(self, count, dims, n):
        assert points_per_dim(count, dims) == n

    def test_points_lie_on_grid(self):
        lattice = build_lattice(162, 3)
        assert lattice.points.shape == (162, 3)
        assert set(np.unique(lattice.points)) <= {k / 5 for k in range(6)}
        np.testing.assert_array_equal(lattice.point(0), [0.0, 0.0, 0.0])
        np.testing.assert_array_equal(lattice.point(1), [0.0, 0.0, 0.2])

    def test_points_are_distinct(self):
        lattice = build_lattice(2516, 8)
        assert np.unique(lattice.points, axis=0).shape[0] == 2516

    def test_knn_nearest_corner(self):
        lattice = build_lattice(8, 3)
        (action, dist), = knn(lattice, np.array([0.4, 0.4, 0.4]), 1)
        assert action == 0
        assert dist == pytest.approx(np.sqrt(0.48))

    def test_knn_ties_break_to_smaller_index(self):
        lattice = build_lattice(8, 3)
        result = knn(lattice, np.array([0.5, 0.5, 0.5]), 8)
        assert [a for a, _ in result] == list(range(8))

    def test_knn_never_returns_surplus_points(self):
        lattice = build_lattice(10, 2)  # 4 x 4 grid, 10 assigned
        result = knn(lattice, np.array([1.0, 1.0]), 50)
        assert len(result) == 10
        assert all(a < 10 for a, _ in result)

    def test_knn_rejects_zero_k(self):
        with pytest.raises(ValueError):
            knn(build_lattice(8, 3), np.zeros(3), 0)


@pytest.mark.unit
class TestObservation:
    """Test observation layout."""

    def test_layout(self, small_trace):
        channel = small_trace[0]
        avg = np.array([0.1, 0.2, 0.3, 0.4])
        obs = build_observation(channel, avg, 10.0, 1.0)
        assert obs.shape == (observation_dim(4, 2),) == (24,)
        blocks = obs.reshape(4, block_size(2))
        np.testing.assert_array_equal(blocks[:, 1], avg)
        assert np.all((blocks[:, 0] >= 0.0) & (blocks[:, 0] <= 1.0))
        np.testing.assert_allclose(csi_from_blocks(obs, 2), channel.true_csi)

    def test_csi_of_a_subset_of_blocks(self, small_trace):
        channel = small_trace[3]
        obs = build_observation(channel, np.ones(4), 10.0, 1.0)
        dims = user_dims([1, 3], 2)
        np.testing.assert_allclose(csi_from_blocks(obs[dims], 2), channel.true_csi[:, [1, 3]])

    def test_matched_filter_gamma_when_users_exceed_antennas(self):
        config = ChannelConfig(num_antennas=2, num_users=6, seed=2)
        channel = generate_csi_trace(config, 1)[0]
        obs = build_observation(channel, np.ones(6), 10.0, 1.0)
        gamma = obs.reshape(6, block_size(2))[:, 0]
        assert np.all((gamma > 0.0) & (gamma < 1.0))

    def test_dim_helpers(self):
        assert user_dims([1], 2) == [6, 7, 8, 9, 10, 11]
        assert csi_dims([1], 2) == [8, 9, 10, 11]
        assert rate_dims([0, 1], 2) == [0, 1, 6, 7]


@pytest.mark.unit
class TestNormalizer:
    """Test Welford statistics."""

    def test_matches_sample_statistics(self, rng):
        data = rng.normal(3.0, 2.0, size=(50, 4))
        state = NormalizerState.empty(4)
        for row in data:
            state = normalizer_update(state, row)
        np.testing.assert_allclose(state.mean, data.mean(axis=0))
        np.testing.assert_allclose(state.std, data.std(axis=0, ddof=1))
        assert state.count == 50

    def test_normalize_denormalize(self, rng):
        state = NormalizerState.empty(3)
        for row in rng.normal(size=(10, 3)):
            state = normalizer_update(state, row)
        x = rng.normal(size=(5, 3))
        np.testing.assert_allclose(denormalize(state, normalize(state, x)), x)

    def test_zero_variance_uses_epsilon(self):
        state = NormalizerState.empty(2)
        for _ in range(3):
            state = normalizer_update(state, np.array([1.0, 2.0]))
        np.testing.assert_array_equal(state.scale, [STD_EPSILON, STD_EPSILON])
        np.testing.assert_allclose(normalize(state, np.array([1.0, 2.0 + 1e-6])), [0.0, 1.0])

    def test_needs_two_samples(self):
        state = normalizer_update(NormalizerState.empty(2), np.zeros(2))
        with pytest.raises(NormalizerNotReadyError):
            normalize(state, np.zeros(2))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            normalizer_update(NormalizerState.empty(2), np.zeros(3))

    def test_observation_box(self, fitted_normalizer):
        box = observation_box(fitted_normalizer, [2], 1.5, 2)
        dims = user_dims([2], 2)
        np.testing.assert_allclose(box.lower, fitted_normalizer.mean[dims] - 1.5 * fitted_normalizer.std[dims])
        np.testing.assert_allclose(box.upper, fitted_normalizer.mean[dims] + 1.5 * fitted_normalizer.std[dims])

    def test_observation_box_rejects_negative_delta(self, fitted_normalizer):
        with pytest.raises(ValueError):
            observation_box(fitted_normalizer, [0], -1.0, 2)


def scalar_env(num_users: int, average_rates: np.ndarray, beta: float = 0.5):
    """Single-antenna env where every user's single-user rate is exactly 2 nats."""
    tx_power = np.e ** 2 - 1.0
    config = EnvConfig(
        num_users=num_users,
        num_antennas=1,
        max_selected=1,
        beta=beta,
        tx_power=tx_power,
        noise_variance=1.0,
        proto_dims=1,
        knn_k=1,
    )
    csi = np.ones((1, num_users), dtype=np.complex128)
    trace = [channel_state(t, csi, tx_power, 1.0) for t in range(3)]
    return replace(reset(config, trace), average_rates=np.asarray(average_rates, dtype=np.float64))


@pytest.mark.unit
class TestEnvironment:
    """Test the proportional-fair transition."""

    def test_scheduled_user_average_rate(self):
        env = scalar_env(1, [1.0])
        env, reward, rates = step(env, 0)
        assert rates[0] == pytest.approx(2.0)
        assert reward == pytest.approx(2.0)
        assert env.average_rates[0] == pytest.approx(1.5)
        assert env.slot == 1

    def test_unscheduled_user_decays(self):
        env = scalar_env(2, [1.0, 1.0])
        env, _, rates = step(env, 0)
        assert rates[1] == 0.0
        assert env.average_rates[1] == pytest.approx(0.5)

    def test_starved_user_decays_below_initial_rate(self):
        env = scalar_env(2, [1.0, 0.015])
        env, _, _ = step(env, 0)
        assert env.average_rates[1] == pytest.approx(0.0075)
        env, _, _ = step(env, 0)
        assert env.average_rates[1] == pytest.approx(0.00375)
        assert env.average_rates[1] < RATE_EPSILON

    def test_starved_user_reward_grows(self):
        env = scalar_env(2, [1.0, RATE_EPSILON])
        env, _, _ = step(env, 0)
        _, reward, _ = step(env, 1)
        assert reward == pytest.approx(2.0 / (0.5 * RATE_EPSILON))

    def test_underflow_floor(self):
        env = scalar_env(2, [1.0, 1e-308])
        env, _, _ = step(env, 0)
        assert env.average_rates[1] == RATE_FLOOR
        _, reward, _ = step(env, 1)
        assert np.isfinite(reward)

    def test_reward_uses_rate_before_update(self):
        env = scalar_env(1, [0.5])
        _, reward, _ = step(env, 0)
        assert reward == pytest.approx(4.0)

    def test_reset_state(self, small_env_config, small_trace):
        env = reset(small_env_config, small_trace)
        assert env.slot == 0
        np.testing.assert_array_equal(env.average_rates, np.full(4, RATE_EPSILON))
        assert observe(env).shape == (24,)

    def test_step_is_pure(self, small_env_config, small_trace):
        env = reset(small_env_config, small_trace)
        first = step(env, 5)
        second = step(env, 5)
        np.testing.assert_array_equal(first[0].average_rates, second[0].average_rates)
        assert first[1] == second[1]
        assert env.slot == 0

    def test_falsified_report_changes_delivered_rates(self, small_env_config, small_trace):
        env = reset(small_env_config, small_trace)
        reported = env.channel.true_csi.copy()
        reported[:, 0] = reported[:, 0] * 1j + 0.5
        action = encode_action((0, 1), 4, 2)
        _, _, truthful = step(env, action)
        _, _, attacked = step(env, action, reported)
        assert not np.allclose(truthful, attacked)
        np.testing.assert_array_equal(attacked[[2, 3]], [0.0, 0.0])

    def test_observe_uses_reported_csi(self, small_env_config, small_trace):
        env = reset(small_env_config, small_trace)
        reported = np.zeros((2, 4), dtype=np.complex128) + 1.0
        np.testing.assert_allclose(csi_from_blocks(observe(env, reported), 2), reported)

    def test_past_end_of_trace(self, small_env_config, small_trace):
        env = reset(small_env_config, small_trace[:1])
        env, _, _ = step(env, 0)
        assert env.done
        with pytest.raises(EnvDoneError):
            step(env, 0)

    def test_trace_shape_must_match(self, small_trace):
        with pytest.raises(ValueError):
            reset(EnvConfig(num_users=4, num_antennas=3, max_selected=2), small_trace)

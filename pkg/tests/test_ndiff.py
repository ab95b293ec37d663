"""
Tests for the differentiation tape, dense networks, Adam and weight files.
"""

import pytest
import numpy as np

from ndiff import (
    AdamState,
    CheckpointFormatError,
    GraphError,
    MlpParams,
    adam_step,
    as_constants,
    as_variables,
    backward,
    forward_graph,
    forward_mlp,
    gradients_of,
    init_mlp,
    load_weights,
    save_weights,
    variable,
)
from ndiff import graph as G
from mdp import NormalizerState


def numeric_gradient(f, x: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    out = np.zeros_like(x)
    for i in range(x.size):
        step = np.zeros_like(x)
        step.flat[i] = eps
        out.flat[i] = (f(x + step) - f(x - step)) / (2 * eps)
    return out


@pytest.mark.unit
class TestGraph:
    """Test reverse-mode derivatives."""

    def test_square_derivative(self):
        """d/dx x^2 at 3 is 6."""
        x = variable(3.0)
        backward(G.square(x))
        assert x.grad == pytest.approx(6.0)

    def test_relu_kink_has_zero_gradient(self):
        x = variable(np.array([0.0, 2.0, -1.0]))
        backward(G.sum_(G.relu(x)))
        np.testing.assert_array_equal(x.grad, [0.0, 1.0, 0.0])

    def test_operator_overloads(self):
        x = variable(np.array([3.0]))
        y = (x * x).sum()
        backward(y)
        np.testing.assert_allclose(x.grad, [6.0])

    def test_broadcast_gradient_is_reduced(self):
        """Adjoint of a broadcast bias sums over the batch."""
        b = variable(np.array([1.0, 2.0]))
        x = G.constant(np.ones((5, 2)))
        backward(G.sum_(x + b))
        np.testing.assert_allclose(b.grad, [5.0, 5.0])

    def test_matmul_matches_finite_differences(self, rng):
        a = rng.normal(size=(3, 4))
        w0 = rng.normal(size=(4, 2))

        def f(w):
            return float(np.sum(np.tanh(a @ w)))

        w = variable(w0)
        backward(G.sum_(G.tanh(G.matmul(G.constant(a), w))))
        np.testing.assert_allclose(w.grad, numeric_gradient(f, w0), rtol=1e-5, atol=1e-7)

    def test_softplus_is_stable_for_large_inputs(self):
        x = variable(np.array([-800.0, 0.0, 800.0]))
        y = G.softplus(x)
        assert np.all(np.isfinite(y.value))
        assert y.value[1] == pytest.approx(np.log(2.0))
        backward(G.sum_(y))
        np.testing.assert_allclose(x.grad, [0.0, 0.5, 1.0], atol=1e-12)

    def test_detach_blocks_gradient(self):
        x = variable(2.0)
        y = G.mul(G.detach(x), x)
        backward(y)
        assert x.grad == pytest.approx(2.0)

    def test_non_scalar_backward_needs_seed(self):
        x = variable(np.ones(3))
        with pytest.raises(GraphError):
            backward(x * 2.0)

    def test_grad_returns_zeros_for_unreachable_inputs(self):
        x = variable(1.0)
        unused = variable(np.ones(2))
        gx, gu = G.grad(G.square(x), [x, unused])
        assert gx == pytest.approx(2.0)
        np.testing.assert_array_equal(gu, np.zeros(2))


@pytest.mark.unit
class TestMlp:
    """Test dense ReLU networks."""

    def test_numpy_and_tape_forward_agree(self, rng):
        params = init_mlp([5, 7, 3], rng)
        x = rng.normal(size=(4, 5))
        tape = forward_graph(as_constants(params), x, params.output_activation)
        np.testing.assert_allclose(forward_mlp(params, x), tape.value)

    def test_sigmoid_output(self, rng):
        params = init_mlp([2, 3, 1], rng, output_activation="sigmoid")
        out = forward_mlp(params, rng.normal(size=(10, 2)))
        assert np.all((out > 0.0) & (out < 1.0))

    def test_weight_gradients_match_finite_differences(self, rng):
        params = init_mlp([3, 4, 1], rng)
        x = rng.normal(size=(6, 3))
        weights = as_variables(params)
        backward(G.sum_(forward_graph(weights, x)))
        grads = gradients_of(weights)

        w0 = params.layers[0][0]

        def f(w):
            p = MlpParams(layers=((w, params.layers[0][1]), params.layers[1]))
            return float(forward_mlp(p, x).sum())

        np.testing.assert_allclose(grads[0], numeric_gradient(f, w0), rtol=1e-4, atol=1e-6)

    def test_layer_shape_mismatch_rejected(self):
        with pytest.raises(GraphError):
            MlpParams(layers=((np.zeros((3, 2)), np.zeros(3)), (np.zeros((1, 4)), np.zeros(1))))

    def test_non_finite_parameters_rejected(self):
        with pytest.raises(GraphError):
            MlpParams(layers=((np.full((1, 1), np.nan), np.zeros(1)),))

    def test_wrong_input_width(self, rng):
        params = init_mlp([3, 2], rng)
        with pytest.raises(GraphError):
            forward_mlp(params, np.zeros(4))

    def test_arrays_round_trip(self, rng):
        params = init_mlp([3, 4, 2], rng, output_activation="sigmoid")
        rebuilt = MlpParams.from_arrays(params.arrays(), "sigmoid")
        assert rebuilt.equals(params)
        assert rebuilt.dims == [3, 4, 2]


@pytest.mark.unit
class TestAdam:
    """Test the Adam optimizer."""

    def test_quadratic_bowl_converges(self):
        """500 steps at lr 0.05 reach the minimum of ||x - c||^2."""
        target = np.array([1.0, -0.5, 0.25])
        x = np.zeros(3)
        state = AdamState.for_params([x], lr=0.05)
        for _ in range(500):
            (x,), state = adam_step(state, [x], [2.0 * (x - target)])
        np.testing.assert_allclose(x, target, atol=1e-3)
        assert state.step == 500

    def test_first_step_moves_by_learning_rate(self):
        x = np.array([0.0, 0.0])
        state = AdamState.for_params([x], lr=0.1)
        (x,), _ = adam_step(state, [x], [np.array([3.0, -0.5])])
        np.testing.assert_allclose(x, [-0.1, 0.1], rtol=1e-6)

    def test_mismatched_lists_rejected(self):
        state = AdamState.for_params([np.zeros(2)])
        with pytest.raises(GraphError):
            adam_step(state, [np.zeros(2), np.zeros(2)], [np.zeros(2)])


@pytest.mark.unit
class TestWeightFiles:
    """Test the binary weight format."""

    def test_save_and_load(self, tmp_path, rng):
        actor = init_mlp([4, 6, 2], rng)
        head = init_mlp([4, 1], rng, output_activation="sigmoid")
        normalizer = NormalizerState(count=5, mean=rng.normal(size=4), m2=rng.uniform(size=4))
        path = save_weights({"actor": actor, "head": head}, normalizer, tmp_path / "w.fggm", meta={"k": 3})

        networks, loaded_norm, meta = load_weights(path)
        assert networks["actor"].equals(actor)
        assert networks["head"].equals(head)
        assert loaded_norm.equals(normalizer)
        assert meta == {"k": 3}

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.fggm"
        path.write_bytes(b"NOPE" + b"\x00" * 32)
        with pytest.raises(CheckpointFormatError, match="magic"):
            load_weights(path)

    def test_truncated_payload(self, tmp_path, rng):
        path = save_weights({"net": init_mlp([3, 3], rng)}, None, tmp_path / "w.fggm")
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(CheckpointFormatError):
            load_weights(path)

    def test_trailing_bytes(self, tmp_path, rng):
        path = save_weights({"net": init_mlp([3, 3], rng)}, None, tmp_path / "w.fggm")
        path.write_bytes(path.read_bytes() + b"\x00" * 8)
        with pytest.raises(CheckpointFormatError, match="trailing"):
            load_weights(path)

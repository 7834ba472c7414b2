import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eeglstm.errors import ShapeError
from eeglstm.layers import (
    DenseParams,
    LstmLayerParams,
    LstmState,
    ModelConfig,
    RnnLayerParams,
    dense_sigmoid_forward,
    dropout_forward,
    flatten_arrays,
    init_params,
    lstm_cell_forward,
    lstm_forward,
    lstm_sequence_forward,
    param_count,
    rnn_cell_forward,
    rnn_output,
)


def sigmoid(z):
    return 1.0 / (1.0 + math.exp(-z))


def scalar_params(b_i=0.0, b_f=0.0, b_c=0.0, b_o=0.0):
    """d=h=1 layer with all weights zero and the given gate biases."""
    return LstmLayerParams(
        kernel=np.zeros((1, 4)),
        recurrent=np.zeros((1, 4)),
        bias=np.array([b_i, b_f, b_c, b_o]),
    )


def scalar_cell_oracle(x, h_prev, c_prev, w, u, b):
    """Closed-form single LSTM step for d=h=1; w/u/b are per-gate dicts."""
    gate = lambda g: sigmoid(w[g] * x + u[g] * h_prev + b[g])
    i, f, o = gate("i"), gate("f"), gate("o")
    cand = math.tanh(w["c"] * x + u["c"] * h_prev + b["c"])
    c = f * c_prev + i * cand
    h = o * math.tanh(c)
    return h, c


class TestLstmCell:
    def test_all_zero_params_zero_state(self):
        state, cache = lstm_cell_forward(np.array([3.7]), LstmState.zeros(1), scalar_params())
        assert state.h[0] == 0.0 and state.c[0] == 0.0
        # gates sit at sigmoid(0) = 0.5, candidate at tanh(0) = 0
        assert cache.gate_i[0, 0, 0] == 0.5
        assert cache.gate_f[0, 0, 0] == 0.5
        assert cache.gate_o[0, 0, 0] == 0.5
        assert cache.gate_c[0, 0, 0] == 0.0

    def test_candidate_bias_case(self):
        # weights zero, b_c = 1 so the candidate is tanh(1), zero prev state
        state, _ = lstm_cell_forward(np.array([0.3]), LstmState.zeros(1), scalar_params(b_c=1.0))
        c_expect = 0.5 * math.tanh(1.0)
        h_expect = 0.5 * math.tanh(c_expect)
        assert state.c[0] == pytest.approx(c_expect, abs=1e-15)
        assert state.h[0] == pytest.approx(h_expect, abs=1e-15)
        assert state.c[0] == pytest.approx(0.380797, abs=1e-6)
        assert state.h[0] == pytest.approx(0.181700, abs=1e-6)

    def test_forget_bias_carries_cell_state(self):
        prev = LstmState(h=np.zeros(1), c=np.ones(1))
        state, _ = lstm_cell_forward(np.array([-2.0]), prev, scalar_params(b_f=1.0))
        c_expect = sigmoid(1.0) * 1.0
        h_expect = 0.5 * math.tanh(c_expect)
        assert state.c[0] == pytest.approx(c_expect, abs=1e-15)
        assert state.h[0] == pytest.approx(h_expect, abs=1e-15)
        assert state.c[0] == pytest.approx(0.731059, abs=1e-6)
        assert state.h[0] == pytest.approx(0.311856, abs=1e-6)

    def test_matches_closed_form_with_random_scalars(self):
        rng = np.random.default_rng(5)
        w, u, b = ({g: rng.normal() for g in "ifco"} for _ in range(3))
        params = LstmLayerParams(
            kernel=np.array([[w["i"], w["f"], w["c"], w["o"]]]),
            recurrent=np.array([[u["i"], u["f"], u["c"], u["o"]]]),
            bias=np.array([b["i"], b["f"], b["c"], b["o"]]),
        )
        x, h0, c0 = 0.7, 0.2, -0.4
        state, _ = lstm_cell_forward(np.array([x]), LstmState(np.array([h0]), np.array([c0])), params)
        h_expect, c_expect = scalar_cell_oracle(x, h0, c0, w, u, b)
        assert state.h[0] == pytest.approx(h_expect, abs=1e-14)
        assert state.c[0] == pytest.approx(c_expect, abs=1e-14)

    def test_shape_errors(self):
        with pytest.raises(ShapeError):
            lstm_cell_forward(np.zeros(2), LstmState.zeros(1), scalar_params())
        with pytest.raises(ShapeError):
            lstm_cell_forward(np.zeros(1), LstmState.zeros(3), scalar_params())


class TestLstmSequence:
    def test_single_step_equals_cell_bitwise(self):
        rng = np.random.default_rng(1)
        params = LstmLayerParams(rng.normal(size=(1, 8)), rng.normal(size=(2, 8)), rng.normal(size=8))
        x = rng.normal(size=1)
        state, _ = lstm_cell_forward(x, LstmState.zeros(2), params)
        out = lstm_sequence_forward(x[None, :], params, mode="last_output")
        assert out.tobytes() == state.h.tobytes()

    def test_all_zero_params_zero_output(self):
        params = LstmLayerParams(np.zeros((1, 12)), np.zeros((3, 12)), np.zeros(12))
        out = lstm_sequence_forward(np.ones(5), params, mode="full_sequence")
        assert out.shape == (5, 3)
        assert np.all(out == 0.0)

    def test_two_step_unroll_matches_scalar_oracle(self):
        params = scalar_params(b_c=1.0)
        out = lstm_sequence_forward(np.array([1.0, 1.0]), params)
        b = {"i": 0.0, "f": 0.0, "c": 1.0, "o": 0.0}
        zero = {g: 0.0 for g in "ifco"}
        h1, c1 = scalar_cell_oracle(1.0, 0.0, 0.0, zero, zero, b)
        h2, c2 = scalar_cell_oracle(1.0, h1, c1, zero, zero, b)
        assert out[0] == pytest.approx(h2, abs=1e-15)
        full = lstm_sequence_forward(np.array([1.0, 1.0]), params, mode="full_sequence")
        assert full[0, 0] == pytest.approx(h1, abs=1e-15)
        assert full[1, 0] == pytest.approx(h2, abs=1e-15)

    def test_empty_sequence_rejected(self):
        with pytest.raises(ValueError):
            lstm_sequence_forward(np.zeros(0), scalar_params())

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValueError):
            lstm_sequence_forward(np.zeros(3), scalar_params(), mode="middle")

    @given(st.integers(1, 6), st.integers(0, 2**32 - 1))
    @settings(max_examples=25)
    def test_hidden_state_bounded(self, steps, seed):
        # gates in (0,1), tanh in (-1,1) => |h| < 1 for bounded params/inputs
        rng = np.random.default_rng(seed)
        h = int(rng.integers(1, 5))
        params = LstmLayerParams(
            rng.uniform(-3, 3, (1, 4 * h)), rng.uniform(-3, 3, (h, 4 * h)), rng.uniform(-3, 3, 4 * h)
        )
        cache = lstm_forward(rng.uniform(-5, 5, (2, steps, 1)), params)
        assert np.all(np.abs(cache.h) < 1.0)
        assert np.all(cache.gate_i > 0.0) and np.all(cache.gate_i < 1.0)
        assert np.all(cache.gate_f > 0.0) and np.all(cache.gate_f < 1.0)
        assert np.all(cache.gate_o > 0.0) and np.all(cache.gate_o < 1.0)


class TestRnnBaseline:
    def test_zero_weights_yield_bias_activation(self):
        params = RnnLayerParams(
            transition=np.zeros((3, 3)),
            input_w=np.zeros((3, 2)),
            output_w=np.zeros((1, 3)),
            bias=np.array([0.5, -0.5, 2.0]),
        )
        h = rnn_cell_forward(np.ones(2), np.ones(3), params)
        assert np.allclose(h, np.tanh(params.bias), atol=0)

    def test_scalar_case(self):
        params = RnnLayerParams(
            transition=np.array([[1.0]]),
            input_w=np.array([[1.0]]),
            output_w=np.array([[1.0]]),
            bias=np.zeros(1),
        )
        h = rnn_cell_forward(np.array([1.0]), np.array([0.0]), params)
        assert h[0] == pytest.approx(math.tanh(1.0), abs=1e-15)
        assert h[0] == pytest.approx(0.761594, abs=1e-6)

    def test_zero_readout_gives_half(self):
        y = rnn_output(np.array([0.3, -0.8]), np.zeros((1, 2)))
        assert y[0] == 0.5

    def test_shape_validation(self):
        with pytest.raises(ShapeError):
            RnnLayerParams(np.zeros((2, 3)), np.zeros((2, 1)), np.zeros((1, 2)), np.zeros(2))


class TestDense:
    def test_zero_params_give_half(self):
        assert dense_sigmoid_forward(np.ones(4), DenseParams(np.zeros(4), np.zeros(()))) == 0.5

    def test_unit_case(self):
        p = dense_sigmoid_forward(np.array([1.0]), DenseParams(np.array([1.0]), np.zeros(())))
        assert p == pytest.approx(sigmoid(1.0), abs=1e-15)
        assert p == pytest.approx(0.731059, abs=1e-6)

    def test_output_strictly_inside_unit_interval(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            h = rng.uniform(-1, 1, 8)
            p = dense_sigmoid_forward(h, DenseParams(rng.uniform(-2, 2, 8), np.asarray(rng.normal())))
            assert 0.0 < p < 1.0

    def test_shape_error(self):
        with pytest.raises(ShapeError):
            dense_sigmoid_forward(np.ones(3), DenseParams(np.zeros(4), np.zeros(())))


class TestDropout:
    def test_eval_mode_is_identity(self):
        v = np.array([1.0, -2.0, 3.0])
        out, mask = dropout_forward(v, 0.35, train=False)
        assert np.array_equal(out, v)
        assert mask is None

    def test_p_zero_train_is_identity(self):
        v = np.array([1.0, -2.0])
        out, mask = dropout_forward(v, 0.0, rng=np.random.default_rng(0), train=True)
        assert np.array_equal(out, v)
        assert mask is None

    def test_invalid_probability(self):
        for p in (-0.1, 1.0, 1.5):
            with pytest.raises(ValueError):
                dropout_forward(np.ones(3), p)

    def test_train_mode_needs_rng(self):
        with pytest.raises(ValueError):
            dropout_forward(np.ones(3), 0.5, rng=None, train=True)

    def test_monte_carlo_expectation(self):
        # inverted dropout preserves the mean: one long constant vector
        out, _ = dropout_forward(np.ones(100_000), 0.35, rng=np.random.default_rng(42), train=True)
        assert out.mean() == pytest.approx(1.0, abs=0.01)

    def test_mask_is_deterministic_given_seed(self):
        v = np.ones(64)
        out1, m1 = dropout_forward(v, 0.35, rng=np.random.default_rng(7), train=True)
        out2, m2 = dropout_forward(v, 0.35, rng=np.random.default_rng(7), train=True)
        assert out1.tobytes() == out2.tobytes()
        assert m1.tobytes() == m2.tobytes()

    def test_mask_values_are_zero_or_scaled(self):
        _, mask = dropout_forward(np.ones(1000), 0.35, rng=np.random.default_rng(1), train=True)
        assert set(np.unique(mask)) == {0.0, 1.0 / 0.65}


class TestParamCount:
    def test_model1_matches_architecture_table(self):
        total, layers = param_count(ModelConfig(variant=1))
        assert layers == [("lstm1", 16896), ("dense", 65)]
        assert total == 16961

    def test_model2_matches_architecture_table(self):
        total, layers = param_count(ModelConfig(variant=2))
        assert layers == [("lstm1", 66560), ("lstm2", 49408), ("dense", 65)]
        assert total == 116033

    def test_smallest_lstm(self):
        total, layers = param_count(ModelConfig(variant=1, hidden_sizes=(1,)))
        assert layers[0] == ("lstm1", 12)  # 4*1*(1+1+1)

    def test_counts_match_instantiated_arrays(self):
        for variant in (1, 2):
            config = ModelConfig(variant=variant, seq_len=16)
            model = init_params(config, 0)
            assert model.num_params == param_count(config)[0]


class TestInit:
    def test_same_seed_bit_identical(self):
        config = ModelConfig(variant=2, seq_len=32, hidden_sizes=(6, 4))
        a = init_params(config, 123).get_flat_params()
        b = init_params(config, 123).get_flat_params()
        assert a.tobytes() == b.tobytes()
        c = init_params(config, 124).get_flat_params()
        assert a.tobytes() != c.tobytes()

    def test_recurrent_gate_blocks_orthogonal(self):
        model = init_params(ModelConfig(variant=1, seq_len=8, hidden_sizes=(16,)), 9)
        layer = model.lstm_layers[0]
        for gate in "ifco":
            u = layer.recurrent_weights(gate)
            assert np.allclose(u.T @ u, np.eye(16), atol=1e-10)

    def test_forget_bias_ones_other_biases_zero(self):
        model = init_params(ModelConfig(variant=2, seq_len=8, hidden_sizes=(6, 4)), 3)
        for layer in model.lstm_layers:
            assert np.all(layer.gate_bias("f") == 1.0)
            for gate in "ico":
                assert np.all(layer.gate_bias(gate) == 0.0)
        assert model.dense.bias == 0.0

    def test_glorot_bounds_on_kernel(self):
        h = 64
        model = init_params(ModelConfig(variant=1, seq_len=8, hidden_sizes=(h,)), 11)
        limit = math.sqrt(6.0 / (1 + 4 * h))
        kernel = model.lstm_layers[0].kernel
        assert np.all(np.abs(kernel) < limit)
        d_limit = math.sqrt(6.0 / (h + 1))
        assert np.all(np.abs(model.dense.weights) < d_limit)


class TestModel:
    def test_forward_shapes_and_range(self):
        config = ModelConfig(variant=2, seq_len=12, hidden_sizes=(6, 4))
        model = init_params(config, 0)
        x = np.random.default_rng(0).standard_normal((5, 12))
        probs, cache = model.forward(x)
        assert probs.shape == (5,)
        assert np.all((probs > 0) & (probs < 1))
        assert cache.pre_dense.shape == (5, 4)

    def test_seq_len_mismatch_raises(self):
        model = init_params(ModelConfig(variant=1, seq_len=12, hidden_sizes=(4,)), 0)
        with pytest.raises(ShapeError):
            model.forward(np.zeros((2, 11)))

    def test_zero_upstream_gradient_gives_zero_grads(self):
        model = init_params(ModelConfig(variant=1, seq_len=6, hidden_sizes=(4,)), 0)
        probs, cache = model.forward(np.ones((3, 6)))
        grads = model.backward(cache, np.zeros(3))
        assert all(np.all(g == 0.0) for g in grads)

    def test_dead_path_gradient_is_exactly_zero(self):
        # all-zero input: the input kernel never sees a signal, its gradient
        # is structurally zero while recurrent/bias paths stay live
        model = init_params(ModelConfig(variant=1, seq_len=6, hidden_sizes=(4,)), 1)
        probs, cache = model.forward(np.zeros((2, 6)))
        grads = model.backward(cache, np.ones(2))
        names = model.param_names()
        kernel_grad = grads[names.index("lstm1.kernel")]
        assert np.all(kernel_grad == 0.0)
        assert np.any(grads[names.index("lstm1.bias")] != 0.0)

    def test_backward_without_cache_is_state_error(self):
        model = init_params(ModelConfig(variant=1, seq_len=6, hidden_sizes=(4,)), 0)
        with pytest.raises(RuntimeError):
            model.backward(None, np.zeros(2))

    def test_train_mode_dropout_needs_rng(self):
        model = init_params(ModelConfig(variant=2, seq_len=6, hidden_sizes=(4, 3)), 0)
        with pytest.raises(ValueError):
            model.forward(np.zeros((2, 6)), train=True)

    def test_train_forward_deterministic_given_seed(self):
        model = init_params(ModelConfig(variant=2, seq_len=10, hidden_sizes=(6, 4)), 2)
        x = np.random.default_rng(3).standard_normal((4, 10))
        p1, _ = model.forward(x, train=True, rng=np.random.default_rng(99))
        p2, _ = model.forward(x, train=True, rng=np.random.default_rng(99))
        assert p1.tobytes() == p2.tobytes()

    def test_flat_param_round_trip(self):
        model = init_params(ModelConfig(variant=2, seq_len=8, hidden_sizes=(5, 3)), 4)
        flat = model.get_flat_params()
        other = init_params(ModelConfig(variant=2, seq_len=8, hidden_sizes=(5, 3)), 5)
        other.set_flat_params(flat)
        assert other.get_flat_params().tobytes() == flat.tobytes()
        with pytest.raises(ShapeError):
            other.set_flat_params(flat[:-1])

    def test_eval_forward_ignores_dropout(self):
        config = ModelConfig(variant=2, seq_len=8, hidden_sizes=(5, 3))
        model = init_params(config, 4)
        x = np.random.default_rng(1).standard_normal((3, 8))
        s1 = model.scores(x)
        s2 = model.scores(x)
        assert s1.tobytes() == s2.tobytes()

    def test_flatten_arrays_handles_scalars(self):
        flat = flatten_arrays([np.ones((2, 2)), np.asarray(3.0)])
        assert flat.shape == (5,)
        assert flat[-1] == 3.0

"""Recurrent and dense layers: exact forward dynamics plus hand-derived
backward passes (backpropagation through time).

LSTM gate weights are stored stacked: one matrix product per time step
computes every gate pre-activation. Column blocks are ordered input, forget,
cell candidate, output; per-gate views are available through
``input_weights``/``recurrent_weights``/``gate_bias`` for inspection.

Shapes follow the batched convention (batch, time, features). The
single-sample functions (`lstm_cell_forward`, `lstm_sequence_forward`, the
RNN cell, `dense_sigmoid_forward`) wrap the same code paths, so a length-1
sequence is bitwise identical to one cell step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError
from .tensor import matvec, sigmoid, tanh

GATE_NAMES = ("i", "f", "c", "o")

# Canonical Bonn recording length (one value per line, 4097 lines per file).
CANONICAL_SEQ_LEN = 4097

MODEL1_HIDDEN = (64,)
MODEL2_HIDDEN = (128, 64)
MODEL2_DROPOUT = 0.35


def _gate_slice(gate: str, hidden: int) -> slice:
    idx = GATE_NAMES.index(gate)
    return slice(idx * hidden, (idx + 1) * hidden)


@dataclass
class LstmLayerParams:
    """Trainable weights of one LSTM layer.

    kernel: (input_dim, 4*hidden) input-to-gate weights
    recurrent: (hidden, 4*hidden) state-to-gate weights
    bias: (4*hidden,)
    """

    kernel: np.ndarray
    recurrent: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        k, r, b = self.kernel, self.recurrent, self.bias
        if k.ndim != 2 or r.ndim != 2 or b.ndim != 1:
            raise ShapeError(
                f"LSTM params must be (d,4h), (h,4h), (4h,), got {k.shape}, {r.shape}, {b.shape}"
            )
        if r.shape[1] != 4 * r.shape[0] or k.shape[1] != r.shape[1] or b.shape[0] != r.shape[1]:
            raise ShapeError(
                f"inconsistent LSTM param shapes: kernel {k.shape}, recurrent {r.shape}, bias {b.shape}"
            )

    @property
    def input_dim(self) -> int:
        return self.kernel.shape[0]

    @property
    def hidden_dim(self) -> int:
        return self.recurrent.shape[0]

    def input_weights(self, gate: str) -> np.ndarray:
        """View of the (input_dim, hidden) input weights for gate i/f/c/o."""
        return self.kernel[:, _gate_slice(gate, self.hidden_dim)]

    def recurrent_weights(self, gate: str) -> np.ndarray:
        return self.recurrent[:, _gate_slice(gate, self.hidden_dim)]

    def gate_bias(self, gate: str) -> np.ndarray:
        return self.bias[_gate_slice(gate, self.hidden_dim)]

    def param_count(self) -> int:
        return self.kernel.size + self.recurrent.size + self.bias.size


@dataclass
class LstmState:
    """Hidden and cell state of one LSTM layer for a single sample."""

    h: np.ndarray
    c: np.ndarray

    @classmethod
    def zeros(cls, hidden: int) -> "LstmState":
        return cls(np.zeros(hidden), np.zeros(hidden))


@dataclass
class LstmLayerCache:
    """Per-timestep activations retained for backpropagation through time.

    All arrays are (batch, time, hidden) except the input x (batch, time, d)
    and the initial states (batch, hidden).
    """

    x: np.ndarray
    gate_i: np.ndarray
    gate_f: np.ndarray
    gate_c: np.ndarray
    gate_o: np.ndarray
    c: np.ndarray
    tanh_c: np.ndarray
    h: np.ndarray
    h0: np.ndarray
    c0: np.ndarray


def lstm_forward(x, params: LstmLayerParams, h0=None, c0=None) -> LstmLayerCache:
    """Run one LSTM layer over a batch of sequences.

    x: (batch, time, input_dim). Initial states default to zeros. Gate
    dynamics per step: i,f,o = sigmoid(gates), g = tanh(candidate),
    c = f*c_prev + i*g, h = o*tanh(c).
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3:
        raise ShapeError(f"lstm_forward expects (batch, time, features), got {x.shape}")
    batch, steps, d = x.shape
    if steps < 1:
        raise ValueError("empty sequence")
    if d != params.input_dim:
        raise ShapeError(f"input feature dim {d} != layer input dim {params.input_dim}")
    hdim = params.hidden_dim
    h_prev = np.zeros((batch, hdim)) if h0 is None else np.asarray(h0, dtype=np.float64)
    c_prev = np.zeros((batch, hdim)) if c0 is None else np.asarray(c0, dtype=np.float64)
    if h_prev.shape != (batch, hdim) or c_prev.shape != (batch, hdim):
        raise ShapeError(f"initial state must be ({batch}, {hdim})")

    sl_i = _gate_slice("i", hdim)
    sl_f = _gate_slice("f", hdim)
    sl_c = _gate_slice("c", hdim)
    sl_o = _gate_slice("o", hdim)

    # Input contribution for every step in one product.
    xw = (x.reshape(batch * steps, d) @ params.kernel).reshape(batch, steps, 4 * hdim)

    gi = np.empty((batch, steps, hdim))
    gf = np.empty((batch, steps, hdim))
    gc = np.empty((batch, steps, hdim))
    go = np.empty((batch, steps, hdim))
    cs = np.empty((batch, steps, hdim))
    tc = np.empty((batch, steps, hdim))
    hs = np.empty((batch, steps, hdim))

    h0_arr, c0_arr = h_prev, c_prev
    for t in range(steps):
        z = xw[:, t] + h_prev @ params.recurrent + params.bias
        it = sigmoid(z[:, sl_i])
        ft = sigmoid(z[:, sl_f])
        gt = tanh(z[:, sl_c])
        ot = sigmoid(z[:, sl_o])
        ct = ft * c_prev + it * gt
        tct = tanh(ct)
        ht = ot * tct
        gi[:, t], gf[:, t], gc[:, t], go[:, t] = it, ft, gt, ot
        cs[:, t], tc[:, t], hs[:, t] = ct, tct, ht
        h_prev, c_prev = ht, ct

    return LstmLayerCache(x, gi, gf, gc, go, cs, tc, hs, h0_arr, c0_arr)


def lstm_backward(dh_out, cache: LstmLayerCache, params: LstmLayerParams):
    """Backpropagate through time for one LSTM layer.

    dh_out: (batch, time, hidden) upstream gradient on every timestep's
    hidden output (zeros where the output is unused).

    Returns (dx, (dkernel, drecurrent, dbias)).
    """
    dh_out = np.asarray(dh_out, dtype=np.float64)
    if dh_out.shape != cache.h.shape:
        raise ShapeError(f"upstream gradient {dh_out.shape} != cached outputs {cache.h.shape}")
    batch, steps, hdim = cache.h.shape
    sl_i = _gate_slice("i", hdim)
    sl_f = _gate_slice("f", hdim)
    sl_c = _gate_slice("c", hdim)
    sl_o = _gate_slice("o", hdim)

    dz = np.zeros((batch, steps, 4 * hdim))
    dh_next = np.zeros((batch, hdim))
    dc_next = np.zeros((batch, hdim))
    for t in reversed(range(steps)):
        it, ft, gt, ot = cache.gate_i[:, t], cache.gate_f[:, t], cache.gate_c[:, t], cache.gate_o[:, t]
        tct = cache.tanh_c[:, t]
        c_prev = cache.c0 if t == 0 else cache.c[:, t - 1]
        dh = dh_out[:, t] + dh_next
        do = dh * tct
        dc = dc_next + dh * ot * (1.0 - tct**2)
        dz[:, t, sl_i] = dc * gt * it * (1.0 - it)
        dz[:, t, sl_f] = dc * c_prev * ft * (1.0 - ft)
        dz[:, t, sl_c] = dc * it * (1.0 - gt**2)
        dz[:, t, sl_o] = do * ot * (1.0 - ot)
        dc_next = dc * ft
        dh_next = dz[:, t] @ params.recurrent.T

    flat_dz = dz.reshape(batch * steps, 4 * hdim)
    dkernel = cache.x.reshape(batch * steps, -1).T @ flat_dz
    h_prev_all = np.concatenate([cache.h0[:, None, :], cache.h[:, :-1]], axis=1)
    drecurrent = h_prev_all.reshape(batch * steps, hdim).T @ flat_dz
    dbias = flat_dz.sum(axis=0)
    dx = (flat_dz @ params.kernel.T).reshape(cache.x.shape)
    return dx, (dkernel, drecurrent, dbias)


def lstm_cell_forward(x_t, prev: LstmState, params: LstmLayerParams):
    """One LSTM step for a single sample.

    x_t: (input_dim,) input at this step. Returns (next_state, cache); the
    cache holds the gate activations needed by the backward pass.
    """
    x_t = np.asarray(x_t, dtype=np.float64)
    if x_t.ndim != 1 or x_t.shape[0] != params.input_dim:
        raise ShapeError(f"x_t must be ({params.input_dim},), got {x_t.shape}")
    if prev.h.shape != (params.hidden_dim,) or prev.c.shape != (params.hidden_dim,):
        raise ShapeError(f"state must be ({params.hidden_dim},), got {prev.h.shape}, {prev.c.shape}")
    cache = lstm_forward(x_t[None, None, :], params, h0=prev.h[None, :], c0=prev.c[None, :])
    nxt = LstmState(cache.h[0, 0].copy(), cache.c[0, 0].copy())
    return nxt, cache


def lstm_sequence_forward(seq, params: LstmLayerParams, mode: str = "last_output") -> np.ndarray:
    """Run one sequence through an LSTM layer from a zero initial state.

    seq: (time,) scalars for input_dim 1, or (time, input_dim). Returns the
    final hidden state (mode "last_output") or all hidden states stacked as
    (time, hidden) (mode "full_sequence").
    """
    if mode not in ("last_output", "full_sequence"):
        raise ValueError(f"unknown mode {mode!r}")
    seq = np.asarray(seq, dtype=np.float64)
    if seq.ndim == 1:
        seq = seq[:, None]
    if seq.ndim != 2:
        raise ShapeError(f"sequence must be 1-D or 2-D, got shape {seq.shape}")
    if seq.shape[0] < 1:
        raise ValueError("empty sequence")
    cache = lstm_forward(seq[None, :, :], params)
    if mode == "last_output":
        return cache.h[0, -1].copy()
    return cache.h[0].copy()


@dataclass
class RnnLayerParams:
    """Weights of the plain recurrent baseline cell.

    transition: (h, h) applied to the previous hidden state
    input_w: (h, d) applied to the current input
    output_w: (out, h) read-out matrix
    bias: (h,)
    """

    transition: np.ndarray
    input_w: np.ndarray
    output_w: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        h = self.transition.shape[0]
        if self.transition.shape != (h, h) or self.input_w.shape[0] != h:
            raise ShapeError(
                f"inconsistent RNN shapes: transition {self.transition.shape}, input {self.input_w.shape}"
            )
        if self.output_w.ndim != 2 or self.output_w.shape[1] != h or self.bias.shape != (h,):
            raise ShapeError(
                f"inconsistent RNN shapes: output {self.output_w.shape}, bias {self.bias.shape}"
            )


def rnn_cell_forward(x_t, h_prev, params: RnnLayerParams) -> np.ndarray:
    """h_t = tanh(W h_prev + U x_t + b)."""
    x_t = np.asarray(x_t, dtype=np.float64)
    h_prev = np.asarray(h_prev, dtype=np.float64)
    return tanh(matvec(params.transition, h_prev) + matvec(params.input_w, x_t) + params.bias)


def rnn_output(h_t, output_w) -> np.ndarray:
    """y_t = sigmoid(V h_t)."""
    return sigmoid(matvec(output_w, np.asarray(h_t, dtype=np.float64)))


@dataclass
class DenseParams:
    """Single-unit read-out layer: weights (h,), scalar bias stored 0-d."""

    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        if self.weights.ndim != 1 or self.bias.ndim != 0:
            raise ShapeError(
                f"dense params must be (h,) weights and a scalar bias, got {self.weights.shape}, {self.bias.shape}"
            )

    def param_count(self) -> int:
        return self.weights.size + 1


def dense_sigmoid_forward(h, params: DenseParams) -> float:
    """Probability sigmoid(w . h + b) for one hidden vector."""
    h = np.asarray(h, dtype=np.float64)
    if h.shape != params.weights.shape:
        raise ShapeError(f"hidden vector {h.shape} != dense weights {params.weights.shape}")
    return float(sigmoid(h @ params.weights + params.bias))


def dropout_forward(values, p: float, rng=None, train: bool = False):
    """Inverted dropout.

    Eval mode (train=False) is the identity. In train mode each entry is
    zeroed with probability p and survivors are scaled by 1/(1-p); the mask
    is returned for the backward pass (None when no masking happened).
    """
    if not 0.0 <= p < 1.0:
        raise ValueError(f"dropout probability must lie in [0, 1), got {p}")
    values = np.asarray(values, dtype=np.float64)
    if not train or p == 0.0:
        return values, None
    if rng is None:
        raise ValueError("train-mode dropout needs an rng")
    mask = (rng.random(values.shape) >= p) / (1.0 - p)
    return values * mask, mask


@dataclass(frozen=True)
class ModelConfig:
    """Architecture description.

    variant 1 is the single-layer classifier (one LSTM, hidden 64, no
    dropout); variant 2 stacks two LSTM layers (128 then 64) with dropout
    0.35 after each. hidden_sizes/dropout_prob may be overridden for
    reduced-size runs; defaults follow the variant.
    """

    variant: int
    seq_len: int = CANONICAL_SEQ_LEN
    hidden_sizes: tuple = ()
    dropout_prob: float | None = None
    input_dim: int = 1

    def __post_init__(self):
        if self.variant not in (1, 2):
            raise ValueError(f"variant must be 1 or 2, got {self.variant}")
        if not self.hidden_sizes:
            default = MODEL1_HIDDEN if self.variant == 1 else MODEL2_HIDDEN
            object.__setattr__(self, "hidden_sizes", default)
        else:
            object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        if self.dropout_prob is None:
            object.__setattr__(self, "dropout_prob", 0.0 if self.variant == 1 else MODEL2_DROPOUT)
        if len(self.hidden_sizes) != self.variant:
            raise ValueError(
                f"variant {self.variant} needs {self.variant} LSTM layer(s), got {self.hidden_sizes}"
            )
        if any(h < 1 for h in self.hidden_sizes):
            raise ValueError(f"hidden sizes must be positive, got {self.hidden_sizes}")
        if not 0.0 <= self.dropout_prob < 1.0:
            raise ValueError(f"dropout_prob must lie in [0, 1), got {self.dropout_prob}")
        if self.seq_len < 1 or self.input_dim < 1:
            raise ValueError(f"seq_len and input_dim must be >= 1, got {self.seq_len}, {self.input_dim}")


def param_count(config: ModelConfig):
    """Total trainable parameter count with a per-layer breakdown.

    LSTM layers contribute 4*h*(h + d + 1), the read-out h + 1.
    Returns (total, [(layer_name, count), ...]).
    """
    layers = []
    d = config.input_dim
    for n, h in enumerate(config.hidden_sizes, start=1):
        layers.append((f"lstm{n}", 4 * h * (h + d + 1)))
        d = h
    layers.append(("dense", d + 1))
    return sum(c for _, c in layers), layers


def _glorot_uniform(rng, shape):
    fan_in, fan_out = shape[0], shape[1]
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def _orthogonal(rng, n: int) -> np.ndarray:
    a = rng.standard_normal((n, n))
    q, r = np.linalg.qr(a)
    # Sign-correct columns so the factorization (and the draw) is unique.
    return q * np.sign(np.diag(r))


def _init_lstm_layer(rng, input_dim: int, hidden: int) -> LstmLayerParams:
    kernel = _glorot_uniform(rng, (input_dim, 4 * hidden))
    recurrent = np.concatenate([_orthogonal(rng, hidden) for _ in GATE_NAMES], axis=1)
    bias = np.zeros(4 * hidden)
    bias[_gate_slice("f", hidden)] = 1.0
    return LstmLayerParams(kernel, recurrent, bias)


def init_params(config: ModelConfig, seed: int) -> "Model":
    """Deterministically initialize a model.

    Input kernels are Glorot-uniform over fan_in + fan_out of the stacked
    (d, 4h) kernel; each gate's recurrent block is an independent orthogonal
    matrix (sign-corrected QR of a seeded Gaussian); biases are zero except
    the forget-gate block, which is one.
    """
    rng = np.random.default_rng(int(seed))
    lstm_layers = []
    d = config.input_dim
    for h in config.hidden_sizes:
        lstm_layers.append(_init_lstm_layer(rng, d, h))
        d = h
    dense = DenseParams(_glorot_uniform(rng, (d, 1))[:, 0], np.zeros(()))
    return Model(config, lstm_layers, dense)


@dataclass
class ModelCache:
    """Everything the model backward pass needs from one forward pass."""

    lstm_caches: list = field(default_factory=list)
    dropout_masks: list = field(default_factory=list)
    pre_dense: np.ndarray | None = None
    probs: np.ndarray | None = None


class Model:
    """One or two LSTM layers feeding a single sigmoid read-out unit.

    The first layer consumes the raw sequence; in the stacked variant its
    full hidden sequence (after dropout) feeds the second layer. The
    read-out always sees the final layer's last hidden state.
    """

    def __init__(self, config: ModelConfig, lstm_layers, dense: DenseParams):
        if len(lstm_layers) != len(config.hidden_sizes):
            raise ShapeError(
                f"expected {len(config.hidden_sizes)} LSTM layer(s), got {len(lstm_layers)}"
            )
        d = config.input_dim
        for layer, h in zip(lstm_layers, config.hidden_sizes):
            if layer.input_dim != d or layer.hidden_dim != h:
                raise ShapeError(
                    f"layer dims ({layer.input_dim}, {layer.hidden_dim}) do not match config ({d}, {h})"
                )
            d = h
        if dense.weights.shape != (d,):
            raise ShapeError(f"dense weights must be ({d},), got {dense.weights.shape}")
        self.config = config
        self.lstm_layers = list(lstm_layers)
        self.dense = dense

    def param_names(self):
        names = []
        for n in range(1, len(self.lstm_layers) + 1):
            names += [f"lstm{n}.kernel", f"lstm{n}.recurrent", f"lstm{n}.bias"]
        return names + ["dense.weights", "dense.bias"]

    def param_arrays(self):
        arrays = []
        for layer in self.lstm_layers:
            arrays += [layer.kernel, layer.recurrent, layer.bias]
        return arrays + [self.dense.weights, self.dense.bias]

    @property
    def num_params(self) -> int:
        return sum(a.size for a in self.param_arrays())

    def get_flat_params(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.param_arrays()])

    def set_flat_params(self, flat) -> None:
        flat = np.asarray(flat, dtype=np.float64)
        if flat.shape != (self.num_params,):
            raise ShapeError(f"expected {self.num_params} parameters, got shape {flat.shape}")
        pos = 0
        for a in self.param_arrays():
            a[...] = flat[pos : pos + a.size].reshape(a.shape)
            pos += a.size

    def _as_batch(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 2:
            x = x[:, :, None]
        if x.ndim != 3:
            raise ShapeError(f"input must be (batch, time) or (batch, time, d), got {x.shape}")
        if x.shape[1] != self.config.seq_len:
            raise ShapeError(f"sequence length {x.shape[1]} != configured {self.config.seq_len}")
        if x.shape[2] != self.config.input_dim:
            raise ShapeError(f"input dim {x.shape[2]} != configured {self.config.input_dim}")
        return x

    def forward(self, x, train: bool = False, rng=None):
        """Forward pass over a batch. Returns (probs, cache).

        Dropout (if configured) is applied after every LSTM layer in train
        mode and consumes the supplied rng stream.
        """
        x = self._as_batch(x)
        if train and self.config.dropout_prob > 0.0 and rng is None:
            raise ValueError("train-mode forward with dropout needs an rng")
        cache = ModelCache()
        last = len(self.lstm_layers) - 1
        feed = x
        out = None
        for idx, layer in enumerate(self.lstm_layers):
            lcache = lstm_forward(feed, layer)
            cache.lstm_caches.append(lcache)
            out = lcache.h[:, -1] if idx == last else lcache.h
            out, mask = dropout_forward(out, self.config.dropout_prob, rng, train)
            cache.dropout_masks.append(mask)
            feed = out
        z = out @ self.dense.weights + self.dense.bias
        probs = sigmoid(z)
        cache.pre_dense = out
        cache.probs = probs
        return probs, cache

    def backward(self, cache: ModelCache, dloss_dp):
        """Gradients of a scalar loss for every parameter.

        dloss_dp: (batch,) upstream derivative of the loss with respect to
        each sample's predicted probability (for a batch-mean loss, the
        per-sample derivatives divided by the batch size). Returns arrays in
        param_arrays() order.
        """
        if not isinstance(cache, ModelCache) or cache.probs is None:
            raise RuntimeError("backward needs the cache produced by forward")
        dloss_dp = np.asarray(dloss_dp, dtype=np.float64)
        if dloss_dp.shape != cache.probs.shape:
            raise ShapeError(f"upstream gradient {dloss_dp.shape} != probs {cache.probs.shape}")
        dz = dloss_dp * cache.probs * (1.0 - cache.probs)
        dw_dense = cache.pre_dense.T @ dz
        db_dense = np.asarray(dz.sum())
        dh = np.outer(dz, self.dense.weights)

        grads_per_layer = [None] * len(self.lstm_layers)
        last = len(self.lstm_layers) - 1
        upstream = dh
        for idx in range(last, -1, -1):
            mask = cache.dropout_masks[idx]
            if mask is not None:
                upstream = upstream * mask
            lcache = cache.lstm_caches[idx]
            if idx == last:
                dh_out = np.zeros_like(lcache.h)
                dh_out[:, -1] = upstream
            else:
                dh_out = upstream
            dx, grads_per_layer[idx] = lstm_backward(dh_out, lcache, self.lstm_layers[idx])
            upstream = dx

        out = []
        for g in grads_per_layer:
            out += list(g)
        return out + [dw_dense, db_dense]

    def scores(self, x) -> np.ndarray:
        """Eval-mode probabilities for a batch (dropout inactive)."""
        probs, _ = self.forward(x, train=False)
        return probs


def flatten_arrays(arrays) -> np.ndarray:
    return np.concatenate([np.asarray(a, dtype=np.float64).ravel() for a in arrays])

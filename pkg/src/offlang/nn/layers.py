"""Neural layers with hand-derived backward passes, on plain numpy arrays.

Conventions:
  * batch data is (batch, time, features); dense data is (batch, features);
  * sequence layers carry a `lengths` vector; positions t >= lengths[b] are
    padding and are excluded from pooling and attention;
  * a fully padded row falls back to position 0 so reductions never see an
    empty window;
  * recurrent layers carry state through padded steps unchanged, so outputs
    do not depend on the amount of padding;
  * `forward(..., train=True)` caches activations for one `backward` call;
    inference-mode forwards cache nothing and are pure.
"""
from __future__ import annotations

import numpy as np


class ShapeError(ValueError):
    """Input does not fit the layer configuration."""


class Parameter:
    """A trainable array paired with its gradient accumulator."""

    __slots__ = ("name", "value", "grad")

    def __init__(self, name: str, value: np.ndarray):
        self.name = name
        self.value = np.asarray(value)
        self.grad = np.zeros_like(self.value)

    def zero_grad(self):
        self.grad[...] = 0


def glorot_uniform(rng, shape, fan_in, fan_out, dtype):
    if rng is None:
        return np.zeros(shape, dtype=dtype)  # loader will fill the values
    limit = float(np.sqrt(6.0 / (fan_in + fan_out)))
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


def sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def length_mask(lengths, batch, steps, min_one=False):
    """Boolean (batch, steps) mask of valid positions.

    ``lengths=None`` treats every position as valid. With ``min_one`` a
    zero-length row keeps position 0, the degenerate-input fallback.
    """
    if lengths is None:
        return np.ones((batch, steps), dtype=bool)
    lengths = np.asarray(lengths)
    if min_one:
        lengths = np.maximum(lengths, 1)
    return np.arange(steps)[None, :] < lengths[:, None]


def dropout_mask(rng, shape, rate, dtype):
    """Inverted-dropout keep mask: 0 with probability rate, else 1/(1-rate)."""
    keep = (rng.random(size=shape) >= rate).astype(dtype)
    return keep / (1.0 - rate)


def word_dropout(embedded, rate, rng, train=True):
    """Zero whole timestep vectors with probability ``rate`` (train only).

    Survivors are rescaled by 1/(1-rate); at inference this is the identity.
    """
    if not train or rate == 0.0:
        return embedded
    mask = dropout_mask(rng, embedded.shape[:-1], rate, embedded.dtype)
    return embedded * mask[..., None]


class Layer:
    def __init__(self):
        self._cache = None

    def parameters(self) -> list[Parameter]:
        return []

    def forward(self, x, lengths, train=False, rng=None):
        raise NotImplementedError

    def backward(self, grad):
        raise NotImplementedError

    def config(self) -> dict:
        raise NotImplementedError

    def _take_cache(self):
        if self._cache is None:
            raise RuntimeError(
                f"{type(self).__name__}.backward called without a cached train-mode forward"
            )
        cache, self._cache = self._cache, None
        return cache


class Embedding(Layer):
    """Trainable lookup table with word-level dropout on its output."""

    def __init__(self, matrix, word_dropout_rate=0.0):
        super().__init__()
        matrix = np.asarray(matrix)
        if matrix.ndim != 2:
            raise ShapeError("embedding matrix must be 2-D")
        if not 0.0 <= word_dropout_rate < 1.0:
            raise ValueError("word dropout rate must lie in [0, 1)")
        self.weights = Parameter("embedding", matrix)
        self.word_dropout_rate = float(word_dropout_rate)

    def parameters(self):
        return [self.weights]

    def forward(self, indices, lengths, train=False, rng=None):
        indices = np.asarray(indices)
        if indices.max(initial=0) >= self.weights.value.shape[0]:
            raise ShapeError("token index out of vocabulary range")
        out = self.weights.value[indices]
        mask = None
        if train and self.word_dropout_rate > 0.0:
            mask = dropout_mask(rng, indices.shape, self.word_dropout_rate, out.dtype)
            out = out * mask[..., None]
        if train:
            self._cache = (indices, mask)
        return out, lengths

    def backward(self, grad):
        indices, mask = self._take_cache()
        if mask is not None:
            grad = grad * mask[..., None]
        np.add.at(self.weights.grad, indices, grad)
        return None  # integer input has no gradient

    def config(self):
        return {
            "type": "embedding",
            "vocab_size": int(self.weights.value.shape[0]),
            "dim": int(self.weights.value.shape[1]),
            "word_dropout": self.word_dropout_rate,
        }


class Dropout(Layer):
    """Standard inverted dropout on every element."""

    def __init__(self, rate):
        super().__init__()
        if not 0.0 <= rate < 1.0:
            raise ValueError("dropout rate must lie in [0, 1)")
        self.rate = float(rate)

    def forward(self, x, lengths, train=False, rng=None):
        if not train:
            return x, lengths
        if self.rate == 0.0:
            self._cache = (None,)
            return x, lengths
        mask = dropout_mask(rng, x.shape, self.rate, x.dtype)
        self._cache = (mask,)
        return x * mask, lengths

    def backward(self, grad):
        (mask,) = self._take_cache()
        return grad if mask is None else grad * mask

    def config(self):
        return {"type": "dropout", "rate": self.rate}


class Dense(Layer):
    """y = activation(x @ W + b); activation in {identity, relu, sigmoid}.

    Sigmoid outputs are clipped into (0, 1) open bounds so downstream log
    losses stay finite.
    """

    SIGMOID_EPS = 1e-7

    def __init__(self, in_dim, units, activation="identity", rng=None, dtype=np.float32):
        super().__init__()
        if activation not in ("identity", "relu", "sigmoid"):
            raise ValueError(f"unknown activation: {activation!r}")
        self.in_dim = int(in_dim)
        self.units = int(units)
        self.activation = activation
        self.weights = Parameter(
            "dense_W", glorot_uniform(rng, (in_dim, units), in_dim, units, dtype)
        )
        self.bias = Parameter("dense_b", np.zeros(units, dtype=dtype))

    def parameters(self):
        return [self.weights, self.bias]

    def forward(self, x, lengths, train=False, rng=None):
        if x.shape[-1] != self.in_dim:
            raise ShapeError(f"expected {self.in_dim} input features, got {x.shape[-1]}")
        z = x @ self.weights.value + self.bias.value
        if self.activation == "relu":
            y = np.maximum(z, 0)
        elif self.activation == "sigmoid":
            s = sigmoid(z)
            y = np.clip(s, self.SIGMOID_EPS, 1.0 - self.SIGMOID_EPS)
        else:
            y = z
        if train:
            self._cache = (x, z, y)
        return y, lengths

    def backward(self, grad):
        x, z, y = self._take_cache()
        if self.activation == "relu":
            dz = grad * (z > 0)
        elif self.activation == "sigmoid":
            s = sigmoid(z)
            dz = grad * s * (1.0 - s) * (y == s)  # zero where the clip bound is active
        else:
            dz = grad
        flat_x = x.reshape(-1, self.in_dim)
        flat_dz = dz.reshape(-1, self.units)
        self.weights.grad += flat_x.T @ flat_dz
        self.bias.grad += flat_dz.sum(axis=0)
        return dz @ self.weights.value.T

    def config(self):
        return {
            "type": "dense",
            "in_dim": self.in_dim,
            "units": self.units,
            "activation": self.activation,
        }


class Conv1D(Layer):
    """Valid 1-D convolution over time with a rectifier activation.

    Kernel shape (width, in_dim, filters); output length L - width + 1. The
    output at position t is valid only if the whole window lies inside the
    true (unpadded) input, so conveyed lengths shrink by width - 1.
    """

    def __init__(self, in_dim, filters, width, rng=None, dtype=np.float32):
        super().__init__()
        self.in_dim = int(in_dim)
        self.filters = int(filters)
        self.width = int(width)
        fan_in = self.width * self.in_dim
        self.weights = Parameter(
            "conv_W",
            glorot_uniform(rng, (self.width, self.in_dim, self.filters), fan_in, filters, dtype),
        )
        self.bias = Parameter("conv_b", np.zeros(self.filters, dtype=dtype))

    def parameters(self):
        return [self.weights, self.bias]

    def forward(self, x, lengths, train=False, rng=None):
        batch, steps, dim = x.shape
        if dim != self.in_dim:
            raise ShapeError(f"expected {self.in_dim} input features, got {dim}")
        if steps < self.width:
            raise ShapeError(f"sequence length {steps} shorter than filter width {self.width}")
        out_steps = steps - self.width + 1
        windows = np.stack([x[:, i : i + out_steps, :] for i in range(self.width)], axis=2)
        cols = windows.reshape(batch, out_steps, self.width * self.in_dim)
        z = cols @ self.weights.value.reshape(-1, self.filters) + self.bias.value
        y = np.maximum(z, 0)
        out_lengths = None if lengths is None else np.maximum(lengths - (self.width - 1), 0)
        if train:
            self._cache = (cols, z > 0, x.shape)
        return y, out_lengths

    def backward(self, grad):
        cols, relu_mask, x_shape = self._take_cache()
        batch, out_steps, _ = cols.shape
        dz = grad * relu_mask
        flat_cols = cols.reshape(-1, self.width * self.in_dim)
        flat_dz = dz.reshape(-1, self.filters)
        self.weights.grad += (flat_cols.T @ flat_dz).reshape(self.weights.value.shape)
        self.bias.grad += flat_dz.sum(axis=0)
        dcols = (flat_dz @ self.weights.value.reshape(-1, self.filters).T).reshape(
            batch, out_steps, self.width, self.in_dim
        )
        dx = np.zeros(x_shape, dtype=grad.dtype)
        for i in range(self.width):
            dx[:, i : i + out_steps, :] += dcols[:, :, i, :]
        return dx

    def config(self):
        return {
            "type": "conv1d",
            "in_dim": self.in_dim,
            "filters": self.filters,
            "width": self.width,
        }


class MaxOverTime(Layer):
    """Elementwise max over valid time positions (first max wins ties)."""

    def forward(self, x, lengths, train=False, rng=None):
        batch, steps, dim = x.shape
        valid = length_mask(lengths, batch, steps, min_one=True)
        lowered = np.where(valid[:, :, None], x, -np.inf)
        arg = lowered.argmax(axis=1)  # (batch, dim)
        out = np.take_along_axis(x, arg[:, None, :], axis=1)[:, 0, :]
        if train:
            self._cache = (arg, x.shape)
        return out, None

    def backward(self, grad):
        arg, x_shape = self._take_cache()
        batch, _, dim = x_shape
        dx = np.zeros(x_shape, dtype=grad.dtype)
        rows = np.arange(batch)[:, None]
        cols = np.arange(dim)[None, :]
        np.add.at(dx, (rows, arg, cols), grad)
        return dx

    def config(self):
        return {"type": "max_over_time"}


class AvgOverTime(Layer):
    """Elementwise mean over valid time positions."""

    def forward(self, x, lengths, train=False, rng=None):
        batch, steps, dim = x.shape
        valid = length_mask(lengths, batch, steps, min_one=True).astype(x.dtype)
        counts = valid.sum(axis=1)  # >= 1 by the fallback rule
        out = (x * valid[:, :, None]).sum(axis=1) / counts[:, None]
        if train:
            self._cache = (valid, counts, x.shape)
        return out, None

    def backward(self, grad):
        valid, counts, x_shape = self._take_cache()
        return grad[:, None, :] * valid[:, :, None] / counts[:, None, None]

    def config(self):
        return {"type": "avg_over_time"}


class AdditiveAttention(Layer):
    """Feed-forward scored attention pooling over a sequence.

    score_t = v . tanh(h_t W + b); weights are a masked softmax over valid
    positions (padding gets exactly zero weight) and the output is the
    weighted sum of the inputs.
    """

    def __init__(self, in_dim, units, rng=None, dtype=np.float32):
        super().__init__()
        self.in_dim = int(in_dim)
        self.units = int(units)
        self.weights = Parameter(
            "attn_W", glorot_uniform(rng, (in_dim, units), in_dim, units, dtype)
        )
        self.bias = Parameter("attn_b", np.zeros(units, dtype=dtype))
        self.score = Parameter("attn_v", glorot_uniform(rng, (units,), units, 1, dtype))
        self.last_weights = None  # (batch, steps) softmax weights of the last forward

    def parameters(self):
        return [self.weights, self.bias, self.score]

    def forward(self, x, lengths, train=False, rng=None):
        batch, steps, dim = x.shape
        if dim != self.in_dim:
            raise ShapeError(f"expected {self.in_dim} input features, got {dim}")
        u = np.tanh(x @ self.weights.value + self.bias.value)  # (B, L, A)
        scores = u @ self.score.value  # (B, L)
        valid = length_mask(lengths, batch, steps, min_one=True)
        scores = np.where(valid, scores, -np.inf)
        scores = scores - scores.max(axis=1, keepdims=True)
        weights = np.exp(scores)
        weights = weights / weights.sum(axis=1, keepdims=True)
        context = (weights[:, :, None] * x).sum(axis=1)
        self.last_weights = weights
        if train:
            self._cache = (x, u, weights)
        return context, None

    def backward(self, grad):
        x, u, weights = self._take_cache()
        dweights = np.einsum("bf,blf->bl", grad, x)
        dx = weights[:, :, None] * grad[:, None, :]
        dscores = weights * (dweights - (weights * dweights).sum(axis=1, keepdims=True))
        du = dscores[:, :, None] * self.score.value
        self.score.grad += (dscores[:, :, None] * u).sum(axis=(0, 1))
        dpre = du * (1.0 - u * u)
        self.weights.grad += np.einsum("bld,bla->da", x, dpre)
        self.bias.grad += dpre.sum(axis=(0, 1))
        dx += dpre @ self.weights.value.T
        return dx

    def config(self):
        return {"type": "attention", "in_dim": self.in_dim, "units": self.units}


def _lstm_direction_forward(x, lengths, W, U, b, reverse):
    """One LSTM direction. Gate order: input, forget, cell candidate, output."""
    batch, steps, _ = x.shape
    units = U.shape[0]
    xp = x @ W + b  # (B, L, 4u)
    mask = length_mask(lengths, batch, steps).astype(x.dtype)
    h = np.zeros((batch, units), dtype=x.dtype)
    c = np.zeros((batch, units), dtype=x.dtype)
    order = range(steps - 1, -1, -1) if reverse else range(steps)
    outputs = np.zeros((batch, steps, units), dtype=x.dtype)
    gates = np.zeros((steps, batch, 4 * units), dtype=x.dtype)
    tanh_c = np.zeros((steps, batch, units), dtype=x.dtype)
    h_prev = np.zeros((steps, batch, units), dtype=x.dtype)
    c_prev = np.zeros((steps, batch, units), dtype=x.dtype)
    for t in order:
        m = mask[:, t : t + 1]
        a = xp[:, t] + h @ U
        i = sigmoid(a[:, :units])
        f = sigmoid(a[:, units : 2 * units])
        g = np.tanh(a[:, 2 * units : 3 * units])
        o = sigmoid(a[:, 3 * units :])
        c_new = f * c + i * g
        tc = np.tanh(c_new)
        h_new = o * tc
        gates[t] = np.concatenate([i, f, g, o], axis=1)
        tanh_c[t] = tc
        h_prev[t] = h
        c_prev[t] = c
        c = m * c_new + (1.0 - m) * c
        h = m * h_new + (1.0 - m) * h
        outputs[:, t] = m * h_new
    cache = (gates, tanh_c, h_prev, c_prev, mask, order)
    return outputs, h, cache


def _lstm_direction_backward(douts, dh_final, cache, x, W, U):
    gates, tanh_c, h_prev, c_prev, mask, order = cache
    batch, steps, _ = x.shape
    units = U.shape[0]
    dxp = np.zeros((batch, steps, 4 * units), dtype=x.dtype)
    dU = np.zeros_like(U)
    dh = dh_final if dh_final is not None else np.zeros((batch, units), dtype=x.dtype)
    dc = np.zeros((batch, units), dtype=x.dtype)
    for t in reversed(list(order)):
        m = mask[:, t : t + 1]
        i = gates[t][:, :units]
        f = gates[t][:, units : 2 * units]
        g = gates[t][:, 2 * units : 3 * units]
        o = gates[t][:, 3 * units :]
        tc = tanh_c[t]
        dh_new = m * (douts[:, t] + dh)
        dh_carry = (1.0 - m) * dh
        dc_new = m * dc
        dc_carry = (1.0 - m) * dc
        do = dh_new * tc
        dc_total = dc_new + dh_new * o * (1.0 - tc * tc)
        di = dc_total * g
        dg = dc_total * i
        df = dc_total * c_prev[t]
        da = np.concatenate(
            [di * i * (1.0 - i), df * f * (1.0 - f), dg * (1.0 - g * g), do * o * (1.0 - o)],
            axis=1,
        )
        dxp[:, t] = da
        dU += h_prev[t].T @ da
        dh = da @ U.T + dh_carry
        dc = dc_total * f + dc_carry
    dW = x.reshape(-1, x.shape[2]).T @ dxp.reshape(-1, 4 * units)
    db = dxp.sum(axis=(0, 1))
    dx = dxp @ W.T
    return dx, dW, dU, db


class BiLSTM(Layer):
    """Bidirectional LSTM; forget-gate bias starts at 1.

    ``dropout`` zeroes input connections with one mask per direction shared
    across timesteps (training only). ``return_sequences`` selects the full
    (B, L, 2u) output or the final states (B, 2u).
    """

    def __init__(self, in_dim, units, dropout=0.0, return_sequences=True, rng=None,
                 dtype=np.float32):
        super().__init__()
        if not 0.0 <= dropout < 1.0:
            raise ValueError("dropout rate must lie in [0, 1)")
        self.in_dim = int(in_dim)
        self.units = int(units)
        self.dropout = float(dropout)
        self.return_sequences = bool(return_sequences)
        self.params = {}
        for tag in ("fw", "bw"):
            W = glorot_uniform(rng, (in_dim, 4 * units), in_dim, 4 * units, dtype)
            U = glorot_uniform(rng, (units, 4 * units), units, 4 * units, dtype)
            b = np.zeros(4 * units, dtype=dtype)
            b[units : 2 * units] = 1.0
            self.params[tag] = (
                Parameter(f"lstm_{tag}_W", W),
                Parameter(f"lstm_{tag}_U", U),
                Parameter(f"lstm_{tag}_b", b),
            )

    def parameters(self):
        return [p for tag in ("fw", "bw") for p in self.params[tag]]

    def _direction_inputs(self, x, train, rng):
        masks = {}
        inputs = {}
        for tag in ("fw", "bw"):
            if train and self.dropout > 0.0:
                mask = dropout_mask(rng, (x.shape[0], 1, x.shape[2]), self.dropout, x.dtype)
                masks[tag] = mask
                inputs[tag] = x * mask
            else:
                masks[tag] = None
                inputs[tag] = x
        return inputs, masks

    def forward(self, x, lengths, train=False, rng=None):
        if x.shape[2] != self.in_dim:
            raise ShapeError(f"expected {self.in_dim} input features, got {x.shape[2]}")
        inputs, masks = self._direction_inputs(x, train, rng)
        caches = {}
        outs = {}
        finals = {}
        for tag, reverse in (("fw", False), ("bw", True)):
            W, U, b = (p.value for p in self.params[tag])
            outs[tag], finals[tag], caches[tag] = _lstm_direction_forward(
                inputs[tag], lengths, W, U, b, reverse
            )
        if self.return_sequences:
            y = np.concatenate([outs["fw"], outs["bw"]], axis=2)
            out_lengths = lengths
        else:
            y = np.concatenate([finals["fw"], finals["bw"]], axis=1)
            out_lengths = None
        if train:
            self._cache = (inputs, masks, caches, x.shape)
        return y, out_lengths

    def backward(self, grad):
        inputs, masks, caches, x_shape = self._take_cache()
        batch, steps, _ = x_shape
        dx = np.zeros(x_shape, dtype=grad.dtype)
        for k, tag in enumerate(("fw", "bw")):
            if self.return_sequences:
                douts = grad[:, :, k * self.units : (k + 1) * self.units]
                dh_final = None
            else:
                douts = np.zeros((batch, steps, self.units), dtype=grad.dtype)
                dh_final = grad[:, k * self.units : (k + 1) * self.units]
            W, U, _ = (p.value for p in self.params[tag])
            dxi, dW, dU, db = _lstm_direction_backward(
                douts, dh_final, caches[tag], inputs[tag], W, U
            )
            pW, pU, pb = self.params[tag]
            pW.grad += dW
            pU.grad += dU
            pb.grad += db
            dx += dxi if masks[tag] is None else dxi * masks[tag]
        return dx

    def config(self):
        return {
            "type": "bilstm",
            "in_dim": self.in_dim,
            "units": self.units,
            "dropout": self.dropout,
            "return_sequences": self.return_sequences,
        }


def _gru_direction_forward(x, lengths, W, U, b, reverse):
    """One GRU direction. Gate order: update, reset, candidate.

    h_t = z * h_{t-1} + (1 - z) * tanh(x W_n + (r * h_{t-1}) U_n + b_n)
    """
    batch, steps, _ = x.shape
    units = U.shape[0]
    xp = x @ W + b  # (B, L, 3u)
    mask = length_mask(lengths, batch, steps).astype(x.dtype)
    h = np.zeros((batch, units), dtype=x.dtype)
    order = range(steps - 1, -1, -1) if reverse else range(steps)
    outputs = np.zeros((batch, steps, units), dtype=x.dtype)
    zs = np.zeros((steps, batch, units), dtype=x.dtype)
    rs = np.zeros((steps, batch, units), dtype=x.dtype)
    ns = np.zeros((steps, batch, units), dtype=x.dtype)
    h_prev = np.zeros((steps, batch, units), dtype=x.dtype)
    for t in order:
        m = mask[:, t : t + 1]
        z = sigmoid(xp[:, t, :units] + h @ U[:, :units])
        r = sigmoid(xp[:, t, units : 2 * units] + h @ U[:, units : 2 * units])
        n = np.tanh(xp[:, t, 2 * units :] + (r * h) @ U[:, 2 * units :])
        h_new = z * h + (1.0 - z) * n
        zs[t], rs[t], ns[t], h_prev[t] = z, r, n, h
        h = m * h_new + (1.0 - m) * h
        outputs[:, t] = m * h_new
    cache = (zs, rs, ns, h_prev, mask, order)
    return outputs, h, cache


def _gru_direction_backward(douts, dh_final, cache, x, W, U):
    zs, rs, ns, h_prev, mask, order = cache
    batch, steps, _ = x.shape
    units = U.shape[0]
    dxp = np.zeros((batch, steps, 3 * units), dtype=x.dtype)
    dU = np.zeros_like(U)
    dh = dh_final if dh_final is not None else np.zeros((batch, units), dtype=x.dtype)
    for t in reversed(list(order)):
        m = mask[:, t : t + 1]
        z, r, n, hp = zs[t], rs[t], ns[t], h_prev[t]
        dh_new = m * (douts[:, t] + dh)
        dh_carry = (1.0 - m) * dh
        dz = dh_new * (hp - n)
        dn = dh_new * (1.0 - z)
        dhp = dh_new * z
        dan = dn * (1.0 - n * n)
        drh = dan @ U[:, 2 * units :].T
        dU[:, 2 * units :] += (r * hp).T @ dan
        dr = drh * hp
        dhp = dhp + drh * r
        daz = dz * z * (1.0 - z)
        dar = dr * r * (1.0 - r)
        dU[:, :units] += hp.T @ daz
        dU[:, units : 2 * units] += hp.T @ dar
        dhp = dhp + daz @ U[:, :units].T + dar @ U[:, units : 2 * units].T
        dxp[:, t, :units] = daz
        dxp[:, t, units : 2 * units] = dar
        dxp[:, t, 2 * units :] = dan
        dh = dhp + dh_carry
    dW = x.reshape(-1, x.shape[2]).T @ dxp.reshape(-1, 3 * units)
    db = dxp.sum(axis=(0, 1))
    dx = dxp @ W.T
    return dx, dW, dU, db


class BiGRU(Layer):
    """Bidirectional GRU returning the full output sequence."""

    def __init__(self, in_dim, units, dropout=0.0, rng=None, dtype=np.float32):
        super().__init__()
        if not 0.0 <= dropout < 1.0:
            raise ValueError("dropout rate must lie in [0, 1)")
        self.in_dim = int(in_dim)
        self.units = int(units)
        self.dropout = float(dropout)
        self.params = {}
        for tag in ("fw", "bw"):
            W = glorot_uniform(rng, (in_dim, 3 * units), in_dim, 3 * units, dtype)
            U = glorot_uniform(rng, (units, 3 * units), units, 3 * units, dtype)
            b = np.zeros(3 * units, dtype=dtype)
            self.params[tag] = (
                Parameter(f"gru_{tag}_W", W),
                Parameter(f"gru_{tag}_U", U),
                Parameter(f"gru_{tag}_b", b),
            )

    def parameters(self):
        return [p for tag in ("fw", "bw") for p in self.params[tag]]

    def forward(self, x, lengths, train=False, rng=None):
        if x.shape[2] != self.in_dim:
            raise ShapeError(f"expected {self.in_dim} input features, got {x.shape[2]}")
        inputs = {}
        masks = {}
        for tag in ("fw", "bw"):
            if train and self.dropout > 0.0:
                mask = dropout_mask(rng, (x.shape[0], 1, x.shape[2]), self.dropout, x.dtype)
                masks[tag] = mask
                inputs[tag] = x * mask
            else:
                masks[tag] = None
                inputs[tag] = x
        caches = {}
        outs = {}
        for tag, reverse in (("fw", False), ("bw", True)):
            W, U, b = (p.value for p in self.params[tag])
            outs[tag], _, caches[tag] = _gru_direction_forward(
                inputs[tag], lengths, W, U, b, reverse
            )
        y = np.concatenate([outs["fw"], outs["bw"]], axis=2)
        if train:
            self._cache = (inputs, masks, caches, x.shape)
        return y, lengths

    def backward(self, grad):
        inputs, masks, caches, x_shape = self._take_cache()
        dx = np.zeros(x_shape, dtype=grad.dtype)
        for k, tag in enumerate(("fw", "bw")):
            douts = grad[:, :, k * self.units : (k + 1) * self.units]
            W, U, _ = (p.value for p in self.params[tag])
            dxi, dW, dU, db = _gru_direction_backward(douts, None, caches[tag], inputs[tag], W, U)
            pW, pU, pb = self.params[tag]
            pW.grad += dW
            pU.grad += dU
            pb.grad += db
            dx += dxi if masks[tag] is None else dxi * masks[tag]
        return dx

    def config(self):
        return {
            "type": "bigru",
            "in_dim": self.in_dim,
            "units": self.units,
            "dropout": self.dropout,
        }


class ParallelConcat(Layer):
    """Runs branches on the same input and concatenates their features."""

    def __init__(self, branches):
        super().__init__()
        self.branches = [list(branch) for branch in branches]
        if not self.branches:
            raise ValueError("ParallelConcat needs at least one branch")

    def parameters(self):
        return [p for branch in self.branches for layer in branch for p in layer.parameters()]

    def forward(self, x, lengths, train=False, rng=None):
        outs = []
        widths = []
        for branch in self.branches:
            y, ylen = x, lengths
            for layer in branch:
                y, ylen = layer.forward(y, ylen, train, rng)
            outs.append(y)
            widths.append(y.shape[-1])
        if train:
            self._cache = (widths,)
        return np.concatenate(outs, axis=-1), None

    def backward(self, grad):
        (widths,) = self._take_cache()
        dx = None
        offset = 0
        for branch, width in zip(self.branches, widths):
            piece = grad[..., offset : offset + width]
            offset += width
            for layer in reversed(branch):
                piece = layer.backward(piece)
            if piece is not None:
                dx = piece if dx is None else dx + piece
        return dx

    def config(self):
        return {
            "type": "parallel",
            "branches": [[layer.config() for layer in branch] for branch in self.branches],
        }


class ModelGraph:
    """A sequential layer stack mapping index sequences to probabilities."""

    def __init__(self, architecture: str, layers: list[Layer]):
        self.architecture = architecture
        self.layers = list(layers)

    def parameters(self) -> list[Parameter]:
        return [p for layer in self.layers for p in layer.parameters()]

    def zero_grad(self):
        for p in self.parameters():
            p.zero_grad()

    def forward(self, indices, lengths, train=False, rng=None) -> np.ndarray:
        """Probabilities in (0, 1), one per row of ``indices``."""
        indices = np.asarray(indices)
        if indices.ndim != 2 or indices.shape[0] == 0:
            raise ShapeError("expected a non-empty (batch, steps) index array")
        x = indices
        for i, layer in enumerate(self.layers):
            try:
                x, lengths = layer.forward(x, lengths, train, rng)
            except ShapeError as exc:
                raise ShapeError(f"layer {i} ({type(layer).__name__}): {exc}") from None
        if x.ndim != 2 or x.shape[1] != 1:
            raise ShapeError(f"model output has shape {x.shape}, expected (batch, 1)")
        return x[:, 0]

    def backward(self, dprob: np.ndarray):
        grad = np.asarray(dprob)[:, None]
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad

    def get_weights(self) -> list[np.ndarray]:
        return [p.value.copy() for p in self.parameters()]

    def set_weights(self, weights):
        params = self.parameters()
        if len(weights) != len(params):
            raise ValueError("weight list does not match parameter list")
        for p, w in zip(params, weights):
            if p.value.shape != w.shape:
                raise ValueError(f"shape mismatch for {p.name}: {p.value.shape} vs {w.shape}")
            p.value[...] = w

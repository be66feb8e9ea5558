"""LSTM, causal Conv1D, attention and dense layers with hand-derived gradients.

Forward functions take one sequence (T, d) or a batch (B, T, d) and return
matching ranks. Backward functions return parameter gradients summed over the
batch plus the gradient with respect to their input. Everything is float64.
"""

import logging
from typing import Callable, Dict, Mapping, Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import special

from forexcast.errors import InvalidArgumentError, NumericInstabilityError, ShapeError
from forexcast.models import (
    AttentionCache,
    AttentionParams,
    Conv1dCache,
    Conv1dParams,
    DenseParams,
    LstmCache,
    LstmParams,
)

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# activations
# ---------------------------------------------------------------------------

def sigmoid(v: np.ndarray) -> np.ndarray:
    return special.expit(np.asarray(v, dtype=np.float64))


def tanh_vec(v: np.ndarray) -> np.ndarray:
    return np.tanh(np.asarray(v, dtype=np.float64))


def softmax(v: np.ndarray, axis: int = -1) -> np.ndarray:
    """Max-shifted softmax along ``axis``"""
    values = np.asarray(v, dtype=np.float64)
    if values.size == 0 or values.shape[axis] == 0:
        raise InvalidArgumentError("softmax of an empty vector")
    return special.softmax(values, axis=axis)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _as_batch(inputs: np.ndarray, name: str) -> Tuple[np.ndarray, bool]:
    x = np.asarray(inputs, dtype=np.float64)
    if x.ndim == 2:
        return x[np.newaxis], False
    if x.ndim == 3:
        return x, True
    raise ShapeError(name, "(T, width) or (B, T, width)", x.shape)


def _unbatch(x: np.ndarray, batched: bool) -> np.ndarray:
    return x if batched else x[0]


def _require_width(name: str, x: np.ndarray, width: int):
    if x.shape[-1] != width:
        raise ShapeError(name, f"(..., {width})", x.shape)
    if x.shape[-2] < 1:
        raise ShapeError(name, "at least one time step", x.shape)


# ---------------------------------------------------------------------------
# LSTM
# ---------------------------------------------------------------------------

def lstm_forward(
    params: LstmParams,
    inputs: np.ndarray,
    initial: Optional[Tuple[np.ndarray, np.ndarray]] = None,
) -> Tuple[np.ndarray, LstmCache]:
    """Run the gated recurrence over every time step; returns all hidden states"""
    x, batched = _as_batch(inputs, "lstm inputs")
    hidden_size, input_size = params.hidden_size, params.input_size
    _require_width("lstm inputs", x, input_size)
    batch, steps, _ = x.shape

    if initial is None:
        c_prev = np.zeros((batch, hidden_size))
        h_prev = np.zeros((batch, hidden_size))
    else:
        c_prev = np.broadcast_to(np.asarray(initial[0], dtype=np.float64), (batch, hidden_size)).copy()
        h_prev = np.broadcast_to(np.asarray(initial[1], dtype=np.float64), (batch, hidden_size)).copy()
    c0, h0 = c_prev.copy(), h_prev.copy()

    w, b = params.stacked()
    stacked = np.empty((batch, steps, hidden_size + input_size))
    gates = np.empty((4, batch, steps, hidden_size))
    cell = np.empty((batch, steps, hidden_size))
    cell_tanh = np.empty_like(cell)
    hidden = np.empty_like(cell)

    hs = hidden_size
    for t in range(steps):
        stacked[:, t, :hs] = h_prev
        stacked[:, t, hs:] = x[:, t]
        z = stacked[:, t] @ w.T + b
        f = sigmoid(z[:, :hs])
        i = sigmoid(z[:, hs:2 * hs])
        g = tanh_vec(z[:, 2 * hs:3 * hs])
        o = sigmoid(z[:, 3 * hs:])
        c_prev = f * c_prev + i * g
        ct = np.tanh(c_prev)
        h_prev = o * ct
        gates[0, :, t], gates[1, :, t], gates[2, :, t], gates[3, :, t] = f, i, g, o
        cell[:, t], cell_tanh[:, t], hidden[:, t] = c_prev, ct, h_prev

    cache = LstmCache(
        inputs=x, stacked=stacked,
        forget=gates[0], input_gate=gates[1], candidate=gates[2], output_gate=gates[3],
        cell=cell, cell_tanh=cell_tanh, hidden=hidden, c0=c0, h0=h0, batched=batched,
    )
    return _unbatch(hidden, batched), cache


def lstm_backward(
    params: LstmParams,
    cache: LstmCache,
    upstream: np.ndarray,
) -> Tuple[LstmParams, np.ndarray]:
    """Backpropagation through time for L = sum_t <upstream_t, h_t>"""
    dh_seq, _ = _as_batch(upstream, "lstm upstream")
    if dh_seq.shape != cache.hidden.shape:
        raise ShapeError("lstm upstream", cache.hidden.shape, dh_seq.shape)
    if cache.stacked.shape[-1] != params.hidden_size + params.input_size:
        raise ShapeError("lstm cache", (params.hidden_size + params.input_size,), cache.stacked.shape[-1:])

    w, _ = params.stacked()
    hs = params.hidden_size
    batch, steps, _ = dh_seq.shape

    dw = np.zeros_like(w)
    db = np.zeros(w.shape[0])
    dx = np.zeros_like(cache.inputs)
    dh_next = np.zeros((batch, hs))
    dc_next = np.zeros((batch, hs))

    for t in reversed(range(steps)):
        f = cache.forget[:, t]
        i = cache.input_gate[:, t]
        g = cache.candidate[:, t]
        o = cache.output_gate[:, t]
        ct = cache.cell_tanh[:, t]
        c_prev = cache.cell[:, t - 1] if t > 0 else cache.c0

        dh = dh_seq[:, t] + dh_next
        dc = dc_next + dh * o * (1.0 - ct * ct)

        dz = np.concatenate([
            dc * c_prev * f * (1.0 - f),
            dc * g * i * (1.0 - i),
            dc * i * (1.0 - g * g),
            dh * ct * o * (1.0 - o),
        ], axis=1)

        dw += dz.T @ cache.stacked[:, t]
        db += dz.sum(axis=0)
        dstacked = dz @ w
        dh_next = dstacked[:, :hs]
        dx[:, t] = dstacked[:, hs:]
        dc_next = dc * f

    return LstmParams.from_stacked(dw, db), _unbatch(dx, cache.batched)


# ---------------------------------------------------------------------------
# causal Conv1D
# ---------------------------------------------------------------------------

def conv1d_forward(params: Conv1dParams, inputs: np.ndarray) -> Tuple[np.ndarray, Conv1dCache]:
    """Trailing-window cross-correlation; the newest sample meets the last tap"""
    x, batched = _as_batch(inputs, "conv inputs")
    _require_width("conv inputs", x, params.input_size)
    k = params.kernel_size

    padded = np.pad(x, ((0, 0), (k - 1, 0), (0, 0)))
    windows = sliding_window_view(padded, k, axis=1)  # (B, T, d, K)
    out = np.tensordot(windows, params.weight, axes=([2, 3], [1, 2])) + params.bias
    return _unbatch(out, batched), Conv1dCache(padded=padded, batched=batched)


def conv1d_backward(
    params: Conv1dParams,
    cache: Conv1dCache,
    upstream: np.ndarray,
) -> Tuple[Conv1dParams, np.ndarray]:
    dout, _ = _as_batch(upstream, "conv upstream")
    k = params.kernel_size
    batch, padded_len, width = cache.padded.shape
    steps = padded_len - k + 1
    if width != params.input_size:
        raise ShapeError("conv cache", (batch, padded_len, params.input_size), cache.padded.shape)
    if dout.shape != (batch, steps, params.num_filters):
        raise ShapeError("conv upstream", (batch, steps, params.num_filters), dout.shape)

    windows = sliding_window_view(cache.padded, k, axis=1)
    d_weight = np.tensordot(dout, windows, axes=([0, 1], [0, 1]))
    d_bias = dout.sum(axis=(0, 1))

    d_padded = np.zeros_like(cache.padded)
    for tap in range(k):
        d_padded[:, tap:tap + steps] += dout @ params.weight[:, :, tap]
    # padding rows are not inputs
    dx = d_padded[:, k - 1:]
    return Conv1dParams(weight=d_weight, bias=d_bias), _unbatch(dx, cache.batched)


# ---------------------------------------------------------------------------
# concatenation
# ---------------------------------------------------------------------------

def concat_channels(h_seq: np.ndarray, y_seq: np.ndarray) -> np.ndarray:
    """[h_t || Y[t]] per time step, LSTM channels first"""
    h = np.asarray(h_seq, dtype=np.float64)
    y = np.asarray(y_seq, dtype=np.float64)
    if h.ndim != y.ndim or h.shape[:-1] != y.shape[:-1]:
        raise ShapeError("concat operands", h.shape[:-1], y.shape[:-1])
    return np.concatenate([h, y], axis=-1)


def split_channels(z_grad: np.ndarray, hidden_size: int) -> Tuple[np.ndarray, np.ndarray]:
    """Reverse of concat_channels: route a Z gradient back to both operands"""
    return z_grad[..., :hidden_size], z_grad[..., hidden_size:]


# ---------------------------------------------------------------------------
# attention
# ---------------------------------------------------------------------------

def attention_forward(params: AttentionParams, z: np.ndarray) -> Tuple[np.ndarray, AttentionCache]:
    """One score per time step, softmax across time, convex combination of the rows of Z"""
    zb, batched = _as_batch(z, "attention Z")
    _require_width("attention Z", zb, params.w_a.shape[0])

    scores = zb @ params.w_a + params.b_a[0]
    alpha = softmax(scores, axis=1)
    context = np.einsum("bt,btm->bm", alpha, zb)
    return _unbatch(context, batched), AttentionCache(z=zb, alpha=alpha, batched=batched)


def attention_backward(
    params: AttentionParams,
    cache: AttentionCache,
    upstream: np.ndarray,
) -> Tuple[AttentionParams, np.ndarray]:
    dc = np.asarray(upstream, dtype=np.float64)
    if dc.ndim == 1:
        dc = dc[np.newaxis]
    batch, _, width = cache.z.shape
    if dc.shape != (batch, width) or params.w_a.shape != (width,):
        raise ShapeError("attention upstream", (batch, width), dc.shape)

    alpha = cache.alpha
    d_alpha = np.einsum("btm,bm->bt", cache.z, dc)
    d_scores = alpha * (d_alpha - np.sum(alpha * d_alpha, axis=1, keepdims=True))

    dz = alpha[:, :, np.newaxis] * dc[:, np.newaxis, :]
    dz += d_scores[:, :, np.newaxis] * params.w_a
    d_w = np.einsum("bt,btm->m", d_scores, cache.z)
    d_b = np.array([d_scores.sum()])
    return AttentionParams(w_a=d_w, b_a=d_b), _unbatch(dz, cache.batched)


# ---------------------------------------------------------------------------
# dense head
# ---------------------------------------------------------------------------

def dense_forward(params: DenseParams, c: np.ndarray):
    """Linear regression head; returns a scalar for one context, (B,) for a batch"""
    context = np.asarray(c, dtype=np.float64)
    if context.shape[-1] != params.w_d.shape[0] or context.ndim not in (1, 2):
        raise ShapeError("dense input", (params.w_d.shape[0],), context.shape)
    y = context @ params.w_d + params.b_d[0]
    return float(y) if context.ndim == 1 else y


def dense_backward(params: DenseParams, c: np.ndarray, upstream) -> Tuple[DenseParams, np.ndarray]:
    context = np.asarray(c, dtype=np.float64)
    g = np.asarray(upstream, dtype=np.float64)
    if context.shape[-1] != params.w_d.shape[0]:
        raise ShapeError("dense input", (params.w_d.shape[0],), context.shape)
    if g.shape != context.shape[:-1]:
        raise ShapeError("dense upstream", context.shape[:-1], g.shape)

    d_w = g @ context if context.ndim == 2 else g * context
    d_b = np.array([g.sum()])
    c_grad = g[..., np.newaxis] * params.w_d
    return DenseParams(w_d=d_w, b_d=d_b), c_grad


# ---------------------------------------------------------------------------
# gradient verification
# ---------------------------------------------------------------------------

LossAndGrads = Callable[[Mapping[str, np.ndarray]], Tuple[float, Mapping[str, np.ndarray]]]


def finite_difference_check(
    loss_and_grads: LossAndGrads,
    params: Mapping[str, np.ndarray],
    eps: float = 1e-5,
    abs_tol: float = 0.0,
) -> float:
    """Max relative error between analytic gradients and central differences.

    ``loss_and_grads(params)`` returns the scalar loss and a gradient per
    parameter name. Each coordinate is perturbed by +/- eps on a private copy.
    Differences not larger than ``abs_tol`` count as exact.
    """
    if not eps > 0:
        raise InvalidArgumentError(f"eps must be > 0, got {eps}")

    base = {name: np.array(value, dtype=np.float64) for name, value in params.items()}
    _, analytic = loss_and_grads(base)

    def evaluate(point: Dict[str, np.ndarray], name: str, index) -> float:
        loss, _ = loss_and_grads(point)
        loss = float(loss)
        if not np.isfinite(loss):
            raise NumericInstabilityError(f"non-finite loss while perturbing {name}{list(index)}")
        return loss

    worst = 0.0
    for name, value in base.items():
        grad = np.asarray(analytic[name], dtype=np.float64)
        if grad.shape != value.shape:
            raise ShapeError(f"gradient {name}", value.shape, grad.shape)
        for index in np.ndindex(value.shape):
            original = value[index]
            value[index] = original + eps
            plus = evaluate(base, name, index)
            value[index] = original - eps
            minus = evaluate(base, name, index)
            value[index] = original

            numeric = (plus - minus) / (2.0 * eps)
            diff = abs(grad[index] - numeric)
            if diff <= abs_tol:
                continue
            error = diff / max(1e-8, abs(grad[index]) + abs(numeric))
            worst = max(worst, error)

    logger.debug(f"Finite-difference check over {len(base)} tensors: max relative error {worst:.3e}")
    return worst

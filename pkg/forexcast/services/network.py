"""The hybrid LSTM || Conv1D predictor with attention fusion, and its single-trunk baselines."""

import logging
from typing import List, Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from forexcast.config import settings
from forexcast.errors import InsufficientDataError, InvalidStateError, ShapeError
from forexcast.models import (
    AttentionParams,
    Conv1dParams,
    DenseParams,
    FeatureMatrix,
    ForwardTrace,
    GradientSet,
    LstmParams,
    ModelParams,
    Scaler,
)
from forexcast.schemas import ModelSpec
from forexcast.services import nn_core

logger = logging.getLogger(__name__)

PredictionRow = Tuple[int, float, float]  # (timestamp, predicted, actual)


def _glorot(rng: np.random.Generator, shape, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def init_params(spec: ModelSpec, seed: int) -> ModelParams:
    """Glorot-uniform weights, zero biases; deterministic in (spec, seed)"""
    rng = np.random.default_rng(seed)
    h, d, f, k, m = spec.hidden_size, spec.input_size, spec.num_filters, spec.kernel_size, spec.context_size

    lstm = None
    if spec.variant.uses_lstm:
        gates = {name: _glorot(rng, (h, h + d), h + d, h) for name in ("w_f", "w_i", "w_c", "w_o")}
        biases = {name: np.zeros(h) for name in ("b_f", "b_i", "b_c", "b_o")}
        lstm = LstmParams(**gates, **biases)

    conv = None
    if spec.variant.uses_conv:
        conv = Conv1dParams(weight=_glorot(rng, (f, d, k), d * k, f * k), bias=np.zeros(f))

    attention = AttentionParams(w_a=_glorot(rng, (m,), m, 1), b_a=np.zeros(1))
    dense = DenseParams(w_d=_glorot(rng, (m,), m, 1), b_d=np.zeros(1))
    return ModelParams(spec=spec, lstm=lstm, conv=conv, attention=attention, dense=dense)


def model_forward(params: ModelParams, window: np.ndarray):
    """Prediction for one window (L, d) or a batch (B, L, d), plus the trace for backward"""
    spec = params.spec
    x = np.asarray(window, dtype=np.float64)
    batched = x.ndim == 3
    if not batched:
        x = x[np.newaxis]
    if x.ndim != 3 or x.shape[1:] != (spec.lookback, spec.input_size):
        raise ShapeError("window", (spec.lookback, spec.input_size), np.shape(window))

    lstm_cache = conv_cache = None
    trunks = []
    if params.lstm is not None:
        h_seq, lstm_cache = nn_core.lstm_forward(params.lstm, x)
        trunks.append(h_seq)
    if params.conv is not None:
        y_seq, conv_cache = nn_core.conv1d_forward(params.conv, x)
        trunks.append(y_seq)
    z = nn_core.concat_channels(*trunks) if len(trunks) == 2 else trunks[0]

    context, attention_cache = nn_core.attention_forward(params.attention, z)
    prediction = nn_core.dense_forward(params.dense, context)

    trace = ForwardTrace(
        lstm=lstm_cache,
        conv=conv_cache,
        attention=attention_cache,
        context=context,
        prediction=prediction,
        variant=spec.variant.value,
        batched=batched,
    )
    return (prediction if batched else float(prediction[0])), trace


def model_backward(params: ModelParams, trace: ForwardTrace, d_loss_d_pred) -> GradientSet:
    """Gradients of the loss w.r.t. every parameter, summed over the batch of the trace"""
    spec = params.spec
    if trace.variant != spec.variant.value:
        raise InvalidStateError(f"trace of variant {trace.variant} used with {spec.variant.value} params")
    if (trace.lstm is None) == spec.variant.uses_lstm or (trace.conv is None) == spec.variant.uses_conv:
        raise InvalidStateError(f"trace caches do not match variant {spec.variant.value}")

    g = np.atleast_1d(np.asarray(d_loss_d_pred, dtype=np.float64))
    if g.shape != trace.prediction.shape:
        raise ShapeError("d_loss_d_pred", trace.prediction.shape, g.shape)

    dense_grads, d_context = nn_core.dense_backward(params.dense, trace.context, g)
    attention_grads, dz = nn_core.attention_backward(params.attention, trace.attention, d_context)

    lstm_grads = conv_grads = None
    if params.lstm is not None and params.conv is not None:
        dh, dy = nn_core.split_channels(dz, spec.hidden_size)
    else:
        dh = dy = dz
    if params.lstm is not None:
        lstm_grads, _ = nn_core.lstm_backward(params.lstm, trace.lstm, dh)
    if params.conv is not None:
        conv_grads, _ = nn_core.conv1d_backward(params.conv, trace.conv, dy)

    return GradientSet(lstm=lstm_grads, conv=conv_grads, attention=attention_grads, dense=dense_grads)


def predict_windows(params: ModelParams, inputs: np.ndarray, chunk_size: Optional[int] = None) -> np.ndarray:
    """Scaled-space predictions for stacked windows (N, L, d), computed chunk by chunk"""
    chunk = chunk_size or settings.PREDICT_CHUNK_SIZE
    outputs = [model_forward(params, inputs[i:i + chunk])[0] for i in range(0, len(inputs), chunk)]
    return np.concatenate(outputs) if outputs else np.zeros(0)


def predict_series(params: ModelParams, features: FeatureMatrix, scaler: Scaler) -> List[PredictionRow]:
    """Price-space prediction for every full lookback window of ``features``"""
    lookback = params.spec.lookback
    if len(features) < lookback:
        raise InsufficientDataError("feature rows", lookback, len(features))
    if features.width != params.spec.input_size or scaler.width != features.width:
        raise ShapeError("features", (len(features), params.spec.input_size), features.rows.shape)

    scaled = scaler.transform_features(features.rows)
    windows = np.ascontiguousarray(sliding_window_view(scaled, lookback, axis=0).transpose(0, 2, 1))
    predicted = scaler.inverse_target(predict_windows(params, windows))

    ends = np.arange(lookback - 1, len(features))
    logger.debug(f"Predicted {len(ends)} windows with {params.spec.variant.value}")
    return [
        (int(features.target_timestamps[e]), float(p), float(features.targets[e]))
        for e, p in zip(ends, predicted)
    ]

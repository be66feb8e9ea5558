"""Mini-batch Adam training of a ModelSpec on a SplitDataset."""

import logging
import time
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

from forexcast.errors import DivergenceError, InvalidArgumentError, ShapeError
from forexcast.models import GradientSet, ModelParams, SplitDataset
from forexcast.schemas import ModelSpec, TrainConfig, TrainReport
from forexcast.services.network import init_params, model_backward, model_forward, predict_windows

logger = logging.getLogger(__name__)

SHUFFLE_SEED_OFFSET = 1


def mse_loss(predictions: Sequence[float], targets: Sequence[float]) -> Tuple[float, np.ndarray]:
    """Mean squared error and its gradient with respect to each prediction"""
    pred = np.asarray(predictions, dtype=np.float64).ravel()
    target = np.asarray(targets, dtype=np.float64).ravel()
    if pred.size == 0 or pred.shape != target.shape:
        raise InvalidArgumentError(f"mse_loss needs equal non-zero lengths, got {pred.size} and {target.size}")
    residual = pred - target
    return float(np.mean(residual * residual)), 2.0 * residual / pred.size


@dataclass(frozen=True)
class AdamState:
    """First/second moment estimates keyed like ModelParams.flat(), plus the step count"""
    m: Dict[str, np.ndarray]
    v: Dict[str, np.ndarray]
    t: int = 0

    @classmethod
    def zeros_like(cls, params: ModelParams) -> "AdamState":
        flat = params.flat()
        return cls(
            m={k: np.zeros_like(x) for k, x in flat.items()},
            v={k: np.zeros_like(x) for k, x in flat.items()},
            t=0,
        )


def adam_step(
    params: ModelParams,
    grads: GradientSet,
    state: AdamState,
    config: TrainConfig,
) -> Tuple[ModelParams, AdamState]:
    """One bias-corrected Adam update of every tensor"""
    theta, g = params.flat(), grads.flat()
    if theta.keys() != g.keys() or theta.keys() != state.m.keys():
        raise ShapeError("gradient set", sorted(theta), sorted(g))

    t = state.t + 1
    b1, b2 = config.beta1, config.beta2
    bc1, bc2 = 1.0 - b1 ** t, 1.0 - b2 ** t

    new_theta, new_m, new_v = {}, {}, {}
    for name, value in theta.items():
        grad = g[name]
        if grad.shape != value.shape:
            raise ShapeError(f"gradient {name}", value.shape, grad.shape)
        m = b1 * state.m[name] + (1.0 - b1) * grad
        v = b2 * state.v[name] + (1.0 - b2) * (grad * grad)
        m_hat = m / bc1
        v_hat = v / bc2
        new_theta[name] = value - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.epsilon)
        new_m[name], new_v[name] = m, v

    return ModelParams.from_flat(params.spec, new_theta), AdamState(m=new_m, v=new_v, t=t)


def _validation_size(n: int, fraction: float) -> int:
    return int(np.floor(fraction * n))


def train(spec: ModelSpec, data: SplitDataset, config: TrainConfig) -> Tuple[ModelParams, TrainReport]:
    """Fit ``spec`` on ``data.train``; the chronologically last slice validates when enabled"""
    if not data.train:
        raise InvalidArgumentError("training partition is empty")
    if (data.lookback, data.width) != (spec.lookback, spec.input_size):
        raise ShapeError("training windows", (spec.lookback, spec.input_size), (data.lookback, data.width))

    inputs, targets, _ = SplitDataset.stack(data.train)
    n_val = _validation_size(len(inputs), config.validation_fraction)
    n_fit = len(inputs) - n_val
    fit_x, fit_y = inputs[:n_fit], targets[:n_fit]
    val_x, val_y = inputs[n_fit:], targets[n_fit:]
    early_stopping = config.patience > 0 and n_val > 0

    params = init_params(spec, config.seed)
    state = AdamState.zeros_like(params)
    rng = np.random.default_rng(config.seed + SHUFFLE_SEED_OFFSET)

    report = TrainReport()
    best_params, best_val, bad_epochs = params, np.inf, 0
    started = time.perf_counter()

    logger.info(
        f"🚀 Training {spec.variant.value} on {n_fit} windows ({n_val} validation), "
        f"{config.epochs} epochs, batch {config.batch_size}"
    )
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n_fit)
        weighted_loss = 0.0
        for batch_no, start in enumerate(range(0, n_fit, config.batch_size), start=1):
            idx = order[start:start + config.batch_size]
            predictions, trace = model_forward(params, fit_x[idx])
            loss, d_pred = mse_loss(predictions, fit_y[idx])
            if not np.isfinite(loss):
                raise DivergenceError(epoch, batch_no, loss)
            grads = model_backward(params, trace, d_pred)
            params, state = adam_step(params, grads, state, config)
            weighted_loss += loss * len(idx)

        report.train_loss.append(weighted_loss / n_fit)
        report.epochs_run = epoch

        if n_val:
            val_loss, _ = mse_loss(predict_windows(params, val_x), val_y)
            if not np.isfinite(val_loss):
                raise DivergenceError(epoch, 0, val_loss)
            report.val_loss.append(val_loss)
            logger.info(f"epoch {epoch}: train {report.train_loss[-1]:.6e} val {val_loss:.6e}")
        else:
            logger.info(f"epoch {epoch}: train {report.train_loss[-1]:.6e}")

        if early_stopping:
            if val_loss < best_val:
                best_params, best_val, bad_epochs = params, val_loss, 0
                report.best_epoch = epoch
            else:
                bad_epochs += 1
                if bad_epochs >= config.patience:
                    report.stopped_early = True
                    logger.info(f"⏹️ Early stop after epoch {epoch}; keeping epoch {report.best_epoch}")
                    break

    if early_stopping:
        params = best_params
    else:
        report.best_epoch = report.epochs_run

    # the last update is never seen by a batch loss
    fit_loss, _ = mse_loss(predict_windows(params, fit_x), fit_y)
    if not (np.isfinite(fit_loss) and all(np.isfinite(t).all() for t in params.flat().values())):
        raise DivergenceError(report.epochs_run, batch_no, fit_loss)
    report.wall_time = time.perf_counter() - started
    logger.info(f"✅ Trained {spec.variant.value} for {report.epochs_run} epochs in {report.wall_time:.1f}s")
    return params, report

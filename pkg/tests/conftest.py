import os

os.environ.setdefault("FOREXCAST_ENVIRONMENT", "test")

import numpy as np
import pytest

from forexcast.models import PriceSeries
from forexcast.schemas import IndicatorConfig, ModelSpec, ModelVariant, TrainConfig
from forexcast.services import nn_core
from forexcast.services.dataset import chronological_split, gen_synthetic, make_windows
from forexcast.services.indicators import build_feature_matrix

SMALL_INDICATORS = IndicatorConfig(sma_n=5, rsi_n=5, bb_n=5, bb_k=2.0)


def series_from_closes(closes, start: int = 1_000) -> PriceSeries:
    """Candles whose open/high/low hug the given closes"""
    close = np.asarray(closes, dtype=np.float64)
    return PriceSeries(
        timestamps=start + 3600 * np.arange(len(close), dtype=np.int64),
        open=close.copy(),
        high=close * 1.001,
        low=close * 0.999,
        close=close,
        volume=np.ones(len(close)),
    )


def small_spec(variant=ModelVariant.HYBRID, input_size=6, hidden=3, filters=2, kernel=3, lookback=6) -> ModelSpec:
    return ModelSpec(
        variant=variant,
        input_size=input_size,
        hidden_size=hidden,
        num_filters=filters,
        kernel_size=kernel,
        lookback=lookback,
    )


@pytest.fixture(autouse=True)
def attention_contract(monkeypatch):
    """Check weights and context of every attention pass the network makes"""
    original = nn_core.attention_forward

    def checked(params, z):
        context, cache = original(params, z)
        if np.isfinite(cache.z).all() and np.isfinite(cache.alpha).all():
            assert (cache.alpha >= 0).all()
            np.testing.assert_allclose(cache.alpha.sum(axis=-1), 1.0, rtol=0, atol=1e-9)
            flat = np.reshape(context, (cache.z.shape[0], -1))
            lo, hi = cache.z.min(axis=1), cache.z.max(axis=1)
            slack = 1e-12 * (1.0 + np.maximum(np.abs(lo), np.abs(hi)))
            assert (flat >= lo - slack).all() and (flat <= hi + slack).all()
        return context, cache

    monkeypatch.setattr(nn_core, "attention_forward", checked)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def sine_series():
    return gen_synthetic("sine", 200, seed=3, noise=0.0)


@pytest.fixture
def small_split(sine_series):
    features = build_feature_matrix(sine_series, SMALL_INDICATORS)
    samples = make_windows(features, 6)
    return chronological_split(samples, 0.8, label="sine")


@pytest.fixture
def quick_train_config():
    return TrainConfig(learning_rate=1e-2, epochs=3, batch_size=16, seed=5, patience=0, validation_fraction=0.1)


def write_csv(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path

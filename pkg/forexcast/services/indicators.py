"""Technical indicators over close prices and the feature matrix built from them.

Every indicator returns an array as long as its input; entries whose window is
not yet full are NaN. Each window is reduced from scratch, so results do not
drift the way running sums do.
"""

import logging
from typing import Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from forexcast.errors import InsufficientDataError, InvalidArgumentError
from forexcast.models import FEATURE_NAMES, FeatureMatrix, PriceSeries
from forexcast.schemas import IndicatorConfig

logger = logging.getLogger(__name__)


def _as_prices(prices: Sequence[float]) -> np.ndarray:
    values = np.asarray(prices, dtype=np.float64)
    if values.ndim != 1 or values.size == 0:
        raise InvalidArgumentError("prices must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(values)):
        raise InvalidArgumentError("prices must be finite")
    return values


def _check_window(n: int) -> None:
    if int(n) != n or n < 1:
        raise InvalidArgumentError(f"window length must be an integer >= 1, got {n}")


def _windows(values: np.ndarray, n: int) -> np.ndarray:
    """(len - n + 1, n) view of every trailing window"""
    return sliding_window_view(values, n)


def sma(prices: Sequence[float], n: int) -> np.ndarray:
    """Simple moving average; entries t < n - 1 are NaN"""
    _check_window(n)
    values = _as_prices(prices)
    out = np.full(values.shape, np.nan)
    if len(values) >= n:
        out[n - 1:] = _windows(values, n).mean(axis=1)
    return out


def rsi(prices: Sequence[float], n: int) -> np.ndarray:
    """Relative strength index from simple means of the last n gains and losses.

    A window without losses reads 100, a completely flat window reads 50.
    Entries t < n are NaN.
    """
    _check_window(n)
    values = _as_prices(prices)
    if len(values) < n + 1:
        raise InsufficientDataError(f"rsi({n}) prices", n + 1, len(values))

    deltas = np.diff(values)
    gains = _windows(np.maximum(deltas, 0.0), n).mean(axis=1)
    losses = _windows(np.maximum(-deltas, 0.0), n).mean(axis=1)

    with np.errstate(divide="ignore", invalid="ignore"):
        rs = gains / losses
        index = 100.0 - 100.0 / (1.0 + rs)
    index = np.where(losses == 0.0, np.where(gains == 0.0, 50.0, 100.0), index)

    out = np.full(values.shape, np.nan)
    out[n:] = index
    return out


def bollinger(prices: Sequence[float], n: int, k: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Upper, middle and lower bands: SMA(n) +/- k population standard deviations"""
    _check_window(n)
    if not np.isfinite(k) or k < 0:
        raise InvalidArgumentError(f"band multiplier must be finite and >= 0, got {k}")
    values = _as_prices(prices)

    middle = np.full(values.shape, np.nan)
    width = np.full(values.shape, np.nan)
    if len(values) >= n:
        windows = _windows(values, n)
        middle[n - 1:] = windows.mean(axis=1)
        width[n - 1:] = k * windows.std(axis=1)
    return middle + width, middle, middle - width


def build_feature_matrix(series: PriceSeries, config: IndicatorConfig) -> FeatureMatrix:
    """Indicator rows for every bar that has full warm-up and a next bar to predict"""
    required = config.min_series_length
    if len(series) < required:
        raise InsufficientDataError("price series length", required, len(series))

    close = series.close
    upper, middle, lower = bollinger(close, config.bb_n, config.bb_k)
    columns = np.column_stack([
        close,
        sma(close, config.sma_n),
        rsi(close, config.rsi_n),
        upper,
        middle,
        lower,
    ])

    start, stop = config.warmup, len(series) - 1
    rows = columns[start:stop]
    assert not np.isnan(rows).any(), "warm-up rows leaked into the feature matrix"

    logger.debug(f"Built {len(rows)} feature rows from {len(series)} bars (warm-up {start})")
    return FeatureMatrix(
        timestamps=series.timestamps[start:stop].copy(),
        rows=np.ascontiguousarray(rows),
        feature_names=FEATURE_NAMES,
        targets=close[start + 1:stop + 1].copy(),
        target_timestamps=series.timestamps[start + 1:stop + 1].copy(),
    )

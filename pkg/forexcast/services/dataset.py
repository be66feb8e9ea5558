import enum
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from sklearn.preprocessing import MinMaxScaler

from forexcast.config import settings
from forexcast.errors import (
    CandleValidationError,
    CsvFormatError,
    CsvOrderingError,
    CsvParseError,
    InsufficientDataError,
    InvalidArgumentError,
)
from forexcast.models import OHLCV_COLUMNS, FeatureMatrix, PriceSeries, Scaler, SplitDataset, WindowSample
from forexcast.models.series import candle_violation

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

# header is line 1, so data row i sits on line i + 2
_FIRST_DATA_LINE = 2


class SynthKind(str, enum.Enum):
    SINE = "sine"
    RANDOM_WALK = "random_walk"


# ---------------------------------------------------------------------------
# OHLCV CSV
# ---------------------------------------------------------------------------

def load_ohlc_csv(path: PathLike) -> PriceSeries:
    """Parse and validate a ``timestamp,open,high,low,close,volume`` file"""
    path = str(path)
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8", skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise CsvFormatError(f"{path}: empty file, expected header {','.join(OHLCV_COLUMNS)}")

    header = [str(c).strip() for c in frame.columns]
    missing = [c for c in OHLCV_COLUMNS if c not in header]
    if missing:
        raise CsvFormatError(f"{path}: missing header columns {missing}; expected {','.join(OHLCV_COLUMNS)}")
    frame.columns = header
    if frame.empty:
        raise CsvFormatError(f"{path}: no data rows")

    raw_stamps = frame["timestamp"].str.strip()
    bad = ~raw_stamps.str.fullmatch(r"[+-]?\d+")
    if bad.any():
        i = int(np.argmax(bad.to_numpy()))
        raise CsvParseError(path, i + _FIRST_DATA_LINE, "timestamp", raw_stamps.iloc[i])
    bounds = np.iinfo(np.int64)
    for i, raw in enumerate(raw_stamps):
        if not bounds.min <= int(raw) <= bounds.max:
            raise CsvParseError(path, i + _FIRST_DATA_LINE, "timestamp", raw)
    stamps = raw_stamps.astype(np.int64).to_numpy()

    columns = {}
    for name in OHLCV_COLUMNS[1:]:
        raw = frame[name].str.strip()
        parsed = pd.to_numeric(raw, errors="coerce").to_numpy(dtype=np.float64)
        bad = np.isnan(parsed)
        if bad.any():
            i = int(np.argmax(bad))
            raise CsvParseError(path, i + _FIRST_DATA_LINE, name, raw.iloc[i])
        columns[name] = parsed

    out_of_order = np.flatnonzero(np.diff(stamps) <= 0)
    if out_of_order.size:
        raise CsvOrderingError(path, int(out_of_order[0]) + 1 + _FIRST_DATA_LINE)

    o, h, l, c, v = (columns[name] for name in OHLCV_COLUMNS[1:])
    invalid = ~(
        np.isfinite(o) & np.isfinite(h) & np.isfinite(l) & np.isfinite(c) & np.isfinite(v)
        & (o > 0) & (h > 0) & (l > 0) & (c > 0) & (v >= 0)
        & (l <= np.minimum(o, c)) & (h >= np.maximum(o, c))
    )
    if invalid.any():
        i = int(np.argmax(invalid))
        raise CandleValidationError(path, i + _FIRST_DATA_LINE, candle_violation(o[i], h[i], l[i], c[i], v[i]))

    logger.info(f"📊 Loaded {len(stamps)} candles from {path}")
    return PriceSeries(timestamps=stamps, open=o, high=h, low=l, close=c, volume=v)


def save_ohlc_csv(series: PriceSeries, path: PathLike) -> None:
    """Write a series in the input schema with round-trip float formatting"""
    frame = pd.DataFrame({name: getattr(series, "timestamps" if name == "timestamp" else name)
                          for name in OHLCV_COLUMNS})
    frame.to_csv(path, index=False, lineterminator="\n")


def save_features_csv(features: FeatureMatrix, path: PathLike) -> None:
    """Debug dump of a feature matrix: timestamp, every feature column, then the target"""
    frame = pd.DataFrame(features.rows, columns=list(features.feature_names))
    frame.insert(0, "timestamp", features.timestamps)
    frame["target"] = features.targets
    frame.to_csv(path, index=False, lineterminator="\n")


# ---------------------------------------------------------------------------
# scaling
# ---------------------------------------------------------------------------

def fit_scaler(rows: np.ndarray, targets: Optional[np.ndarray] = None) -> Scaler:
    """Per-channel min/max; ``rows`` is (N, d + 1) or, with ``targets``, (N, d) features"""
    features = np.asarray(rows, dtype=np.float64)
    if features.ndim != 2 or len(features) == 0:
        raise InvalidArgumentError("fit_scaler needs a non-empty 2-D matrix")
    try:
        fitted = MinMaxScaler().fit(features)
    except ValueError as e:
        raise InvalidArgumentError(f"fit_scaler: {e}")
    mins, maxs = fitted.data_min_.copy(), fitted.data_max_.copy()
    if targets is not None:
        target = np.asarray(targets, dtype=np.float64).reshape(-1, 1)
        if target.size == 0:
            raise InvalidArgumentError("fit_scaler needs at least one target")
        # windows overlap, so targets and feature rows differ in count
        fitted = MinMaxScaler().fit(target)
        mins, maxs = np.append(mins, fitted.data_min_), np.append(maxs, fitted.data_max_)
    return Scaler(mins=mins, maxs=maxs, fitted=True)


def apply_scaler(scaler: Scaler, rows: np.ndarray) -> np.ndarray:
    """Scale full rows (..., d + 1) channel by channel"""
    return scaler.scale(rows, slice(None))


def invert_scaler(scaler: Scaler, rows: np.ndarray) -> np.ndarray:
    """Inverse of apply_scaler (exact on non-degenerate channels)"""
    return scaler.unscale(rows, slice(None))


# ---------------------------------------------------------------------------
# windows and split
# ---------------------------------------------------------------------------

def make_windows(features: FeatureMatrix, lookback: int) -> List[WindowSample]:
    """Every run of ``lookback`` consecutive rows, targeting the close after its last row"""
    if lookback < 1:
        raise InvalidArgumentError(f"lookback must be >= 1, got {lookback}")
    if len(features) < lookback:
        raise InsufficientDataError("feature rows for windows", lookback, len(features))
    return [
        WindowSample(
            inputs=features.rows[j:j + lookback].copy(),
            target=float(features.targets[j + lookback - 1]),
            timestamp=int(features.target_timestamps[j + lookback - 1]),
        )
        for j in range(len(features) - lookback + 1)
    ]


def chronological_split(
    samples: Sequence[WindowSample],
    train_fraction: float,
    scaler_fit: bool = True,
    label: str = "dataset",
) -> SplitDataset:
    """Earliest samples train, the rest test; scaler statistics come from train only"""
    if len(samples) < 2:
        raise InsufficientDataError("window samples for a split", 2, len(samples))
    if not 0 < train_fraction < 1:
        raise InvalidArgumentError(f"train_fraction must lie in (0, 1), got {train_fraction}")

    ordered = sorted(samples, key=lambda s: s.timestamp)
    n_train = int(np.floor(train_fraction * len(ordered)))
    if n_train == 0 or n_train == len(ordered):
        raise InvalidArgumentError(
            f"train_fraction {train_fraction} leaves an empty partition for {len(ordered)} samples"
        )
    train, test = ordered[:n_train], ordered[n_train:]
    lookback, width = train[0].inputs.shape

    if scaler_fit:
        train_rows = np.concatenate([s.inputs for s in train])
        scaler = fit_scaler(train_rows, np.array([s.target for s in train]))
    else:
        scaler = Scaler.identity(width)

    def scaled(sample: WindowSample) -> WindowSample:
        return WindowSample(
            inputs=scaler.transform_features(sample.inputs),
            target=float(scaler.transform_target(sample.target)),
            timestamp=sample.timestamp,
        )

    logger.info(f"✂️ Split {len(ordered)} windows into {len(train)} train / {len(test)} test")
    return SplitDataset(
        train=[scaled(s) for s in train],
        test=[scaled(s) for s in test],
        scaler=scaler,
        lookback=lookback,
        width=width,
        train_fraction=train_fraction,
        label=label,
    )


# ---------------------------------------------------------------------------
# synthetic series
# ---------------------------------------------------------------------------

SINE_PERIOD = 48
SINE_AMPLITUDE = 0.05
MIN_SYNTH_BARS = 10
MAX_SYNTH_NOISE = 0.5


def gen_synthetic(kind: Union[SynthKind, str], n: int, seed: int, noise: float) -> PriceSeries:
    """Seeded hourly series (numpy PCG64); sine or multiplicative random walk around 1.0"""
    kind = SynthKind(kind)
    if n < MIN_SYNTH_BARS:
        raise InvalidArgumentError(f"bars must be >= {MIN_SYNTH_BARS}, got {n}")
    if not 0 <= noise <= MAX_SYNTH_NOISE:
        raise InvalidArgumentError(f"noise must lie in [0, {MAX_SYNTH_NOISE}], got {noise}")

    rng = np.random.default_rng(seed)
    u = rng.uniform(-1.0, 1.0, size=n)
    v = rng.uniform(-1.0, 1.0, size=n)
    t = np.arange(n)

    if kind is SynthKind.SINE:
        close = 1.0 + SINE_AMPLITUDE * np.sin(2.0 * np.pi * t / SINE_PERIOD) + noise * u
    else:
        steps = 1.0 + noise * u
        steps[0] = 1.0
        close = np.cumprod(steps)

    open_ = np.concatenate([close[:1], close[:-1]])
    wick = 0.5 * noise * np.abs(v) * np.minimum(open_, close)
    return PriceSeries(
        timestamps=settings.SYNTH_START_TIMESTAMP + t.astype(np.int64) * settings.SYNTH_BAR_SECONDS,
        open=open_,
        high=np.maximum(open_, close) + wick,
        low=np.minimum(open_, close) - wick,
        close=close,
        volume=np.ones(n),
    )

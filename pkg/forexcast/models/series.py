from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from forexcast.errors import InvalidArgumentError, InvalidStateError

FEATURE_NAMES: Tuple[str, ...] = ("close", "sma", "rsi", "bb_upper", "bb_middle", "bb_lower")
OHLCV_COLUMNS: Tuple[str, ...] = ("timestamp", "open", "high", "low", "close", "volume")


def candle_violation(o: float, h: float, l: float, c: float, v: float) -> Optional[str]:
    """Reason a bar breaks the OHLC invariants, or None"""
    prices = (o, h, l, c)
    if not all(np.isfinite(p) and p > 0 for p in prices):
        return "prices must be finite and > 0"
    if not (np.isfinite(v) and v >= 0):
        return "volume must be finite and >= 0"
    if l > min(o, c):
        return f"low {l} > min(open, close) {min(o, c)}"
    if h < max(o, c):
        return f"high {h} < max(open, close) {max(o, c)}"
    return None


@dataclass(frozen=True)
class PriceSeries:
    """Ordered OHLCV bars stored column-wise"""
    timestamps: np.ndarray
    open: np.ndarray
    high: np.ndarray
    low: np.ndarray
    close: np.ndarray
    volume: np.ndarray

    def __post_init__(self):
        n = len(self.timestamps)
        if n < 1:
            raise InvalidArgumentError("a price series needs at least one candle")
        for name in OHLCV_COLUMNS[1:]:
            if len(getattr(self, name)) != n:
                raise InvalidArgumentError(f"column '{name}' has {len(getattr(self, name))} values, expected {n}")
        if n > 1 and not np.all(np.diff(self.timestamps) > 0):
            raise InvalidArgumentError("timestamps must be strictly increasing")
        for i in range(n):
            reason = candle_violation(self.open[i], self.high[i], self.low[i], self.close[i], self.volume[i])
            if reason:
                raise InvalidArgumentError(f"candle {i}: {reason}")

    def __len__(self) -> int:
        return len(self.timestamps)


@dataclass(frozen=True)
class FeatureMatrix:
    """Indicator rows aligned with next-bar close targets"""
    timestamps: np.ndarray          # (T,) input bar of each row
    rows: np.ndarray                # (T, d)
    feature_names: Tuple[str, ...]
    targets: np.ndarray             # (T,) close of the next bar
    target_timestamps: np.ndarray   # (T,) timestamp of the next bar

    def __post_init__(self):
        t = len(self.rows)
        if not (len(self.timestamps) == len(self.targets) == len(self.target_timestamps) == t):
            raise InvalidArgumentError("rows, timestamps and targets must have equal length")
        if self.rows.ndim != 2 or self.rows.shape[1] != len(self.feature_names):
            raise InvalidArgumentError("rows width must equal the number of feature names")
        if len(set(self.feature_names)) != len(self.feature_names):
            raise InvalidArgumentError("duplicate feature names")
        if not (np.all(np.isfinite(self.rows)) and np.all(np.isfinite(self.targets))):
            raise InvalidArgumentError("feature matrix contains non-finite values")

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def width(self) -> int:
        return self.rows.shape[1]


@dataclass
class Scaler:
    """Per-channel min-max scaler; channel d (the last) is the target"""
    mins: np.ndarray
    maxs: np.ndarray
    fitted: bool = True

    @classmethod
    def unfitted(cls, width: int) -> "Scaler":
        return cls(mins=np.zeros(width + 1), maxs=np.ones(width + 1), fitted=False)

    @classmethod
    def identity(cls, width: int) -> "Scaler":
        return cls(mins=np.zeros(width + 1), maxs=np.ones(width + 1), fitted=True)

    @property
    def width(self) -> int:
        """Feature channels (excluding the target)"""
        return len(self.mins) - 1

    def _require_fitted(self):
        if not self.fitted:
            raise InvalidStateError("scaler used before fit_scaler")

    def _span(self) -> np.ndarray:
        return self.maxs - self.mins

    def scale(self, values: np.ndarray, channels: slice) -> np.ndarray:
        self._require_fitted()
        lo, span = self.mins[channels], self._span()[channels]
        degenerate = span == 0
        safe = np.where(degenerate, 1.0, span)
        return np.where(degenerate, 0.5, (np.asarray(values, dtype=np.float64) - lo) / safe)

    def unscale(self, values: np.ndarray, channels: slice) -> np.ndarray:
        self._require_fitted()
        return np.asarray(values, dtype=np.float64) * self._span()[channels] + self.mins[channels]

    def transform_features(self, x: np.ndarray) -> np.ndarray:
        return self.scale(x, slice(0, self.width))

    def transform_target(self, y: np.ndarray) -> np.ndarray:
        return self.scale(y, slice(self.width, self.width + 1)).reshape(np.shape(y))

    def inverse_target(self, y: np.ndarray) -> np.ndarray:
        return self.unscale(y, slice(self.width, self.width + 1)).reshape(np.shape(y))


@dataclass(frozen=True)
class WindowSample:
    """One supervised pair: L consecutive feature rows and the next-bar close"""
    inputs: np.ndarray  # (L, d)
    target: float
    timestamp: int      # target bar


@dataclass
class SplitDataset:
    """Chronological train/test partition sharing a train-fitted scaler"""
    train: List[WindowSample]
    test: List[WindowSample]
    scaler: Scaler
    lookback: int
    width: int
    train_fraction: float
    label: str = field(default="dataset")

    @staticmethod
    def stack(samples: Sequence[WindowSample]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Samples as (inputs (N, L, d), targets (N,), timestamps (N,)) arrays"""
        if not samples:
            raise InvalidArgumentError("no samples to stack")
        inputs = np.stack([s.inputs for s in samples])
        targets = np.array([s.target for s in samples], dtype=np.float64)
        stamps = np.array([s.timestamp for s in samples], dtype=np.int64)
        return inputs, targets, stamps

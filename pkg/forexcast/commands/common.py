"""Shared plumbing for the subcommands: config loading, flag groups and the data pipeline."""

import argparse
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

from forexcast.errors import DimensionMismatchError, InvalidArgumentError
from forexcast.models import FeatureMatrix, ModelParams, PriceSeries, Scaler, SplitDataset
from forexcast.schemas import IndicatorConfig, ModelVariant, RunConfig, validate_config
from forexcast.services.dataset import chronological_split, load_ohlc_csv, make_windows
from forexcast.services.indicators import build_feature_matrix
from forexcast.services.network import PredictionRow, predict_series

logger = logging.getLogger(__name__)

# (flag, type, help) per option group; dest names match RunConfig fields
INDICATOR_OPTIONS = (
    ("--sma-n", int, "SMA window in bars (default 20)"),
    ("--rsi-n", int, "RSI window in bars (default 14)"),
    ("--bb-n", int, "Bollinger window in bars (default 20)"),
    ("--bb-k", float, "Bollinger band multiplier (default 2.0)"),
)
MODEL_OPTIONS = (
    ("--hidden-size", int, "LSTM units (default 64)"),
    ("--num-filters", int, "Conv1D filters (default 32)"),
    ("--kernel-size", int, "Conv1D kernel size (default 3)"),
    ("--lookback", int, "window length in bars (default 60)"),
)
SPLIT_OPTIONS = (
    ("--train-fraction", float, "chronological train share (default 0.8)"),
)
TRAIN_OPTIONS = (
    ("--learning-rate", float, "Adam step size (default 1e-3)"),
    ("--beta1", float, "Adam first-moment decay (default 0.9)"),
    ("--beta2", float, "Adam second-moment decay (default 0.999)"),
    ("--epsilon", float, "Adam epsilon (default 1e-8)"),
    ("--epochs", int, "maximum epochs (default 100)"),
    ("--batch-size", int, "mini-batch size (default 64)"),
    ("--seed", int, "base seed; init uses seed, shuffling seed + 1 (default 0)"),
    ("--patience", int, "early-stopping patience, 0 disables (default 10)"),
    ("--validation-fraction", float, "tail of the train split used for validation (default 0.1)"),
)


def add_options(parser: argparse.ArgumentParser, title: str, options: Iterable[tuple]) -> None:
    """Register flags whose absence leaves the config file (or schema default) in charge"""
    group = parser.add_argument_group(title)
    for flag, kind, help_text in options:
        group.add_argument(flag, type=kind, default=argparse.SUPPRESS, help=help_text)


def add_config_option(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--config",
        type=Path,
        default=None,
        help="flat JSON object keyed by flag names; explicit flags win",
    )


def read_config_file(path: Optional[Path]) -> Dict[str, Any]:
    if path is None:
        return {}
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise InvalidArgumentError(f"{path}: config is not valid JSON ({e})")
    if not isinstance(raw, dict):
        raise InvalidArgumentError(f"{path}: config must be a JSON object")
    return {str(key).lstrip("-").replace("-", "_"): value for key, value in raw.items()}


def load_run_config(args: argparse.Namespace, **overrides: Any) -> RunConfig:
    """Merge config file < explicit flags < ``overrides`` and validate the result"""
    merged = read_config_file(getattr(args, "config", None))
    for name in RunConfig.model_fields:
        if name in vars(args) and getattr(args, name) is not None:
            merged[name] = getattr(args, name)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    config = validate_config(RunConfig, merged)
    logger.debug(f"Run config: {config.model_dump(mode='json')}")
    return config


def dataset_label(path) -> str:
    return Path(path).stem


def load_features(path, indicators: IndicatorConfig) -> FeatureMatrix:
    series: PriceSeries = load_ohlc_csv(path)
    return build_feature_matrix(series, indicators)


def prepare_split(config: RunConfig, path) -> SplitDataset:
    """load -> featurize -> window -> chronological split, labeled by the file stem"""
    features = load_features(path, config.indicator_config())
    samples = make_windows(features, config.lookback)
    return chronological_split(samples, config.train_fraction, label=dataset_label(path))


def check_dimensions(params: ModelParams, scaler: Scaler, features: FeatureMatrix) -> None:
    spec = params.spec
    if features.width != spec.input_size:
        raise DimensionMismatchError(
            f"checkpoint expects {spec.input_size} features per bar, data yields {features.width}"
        )
    if scaler.width != features.width:
        raise DimensionMismatchError(
            f"checkpoint scaler covers {scaler.width} features, data yields {features.width}"
        )


def score_rows(
    params: ModelParams,
    scaler: Scaler,
    features: FeatureMatrix,
    train_fraction: Optional[float] = None,
) -> List[PredictionRow]:
    """Predictions for every window, or only the chronological test tail when a fraction is given"""
    check_dimensions(params, scaler, features)
    rows = predict_series(params, features, scaler)
    if train_fraction is None:
        return rows
    if not 0 < train_fraction < 1:
        raise InvalidArgumentError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    cut = int(train_fraction * len(rows))
    if cut >= len(rows):
        raise InvalidArgumentError(f"train_fraction {train_fraction} leaves no test windows")
    return rows[cut:]


def parse_variants(text: str) -> List[ModelVariant]:
    """argparse type for ``--variants hybrid,lstm_only``; order is preserved"""
    names = [part.strip() for part in text.split(",") if part.strip()]
    try:
        variants = [ModelVariant(name) for name in names]
    except ValueError:
        allowed = ", ".join(v.value for v in ModelVariant)
        raise argparse.ArgumentTypeError(f"unknown variant in {text!r}; choose from {allowed}")
    if not variants:
        raise argparse.ArgumentTypeError("at least one variant is required")
    if len(set(variants)) != len(variants):
        raise argparse.ArgumentTypeError(f"duplicate variant in {text!r}")
    return variants

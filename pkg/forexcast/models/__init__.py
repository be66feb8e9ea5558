# Domain containers: market data, features, windows and network parameters
from .params import (
    AttentionCache,
    AttentionParams,
    Conv1dCache,
    Conv1dParams,
    DenseParams,
    ForwardTrace,
    GradientSet,
    LstmCache,
    LstmParams,
    ModelParams,
    ParamGroup,
)
from .series import (
    FEATURE_NAMES,
    OHLCV_COLUMNS,
    FeatureMatrix,
    PriceSeries,
    Scaler,
    SplitDataset,
    WindowSample,
)

__all__ = [
    "AttentionCache",
    "AttentionParams",
    "Conv1dCache",
    "Conv1dParams",
    "DenseParams",
    "FEATURE_NAMES",
    "FeatureMatrix",
    "ForwardTrace",
    "GradientSet",
    "LstmCache",
    "LstmParams",
    "ModelParams",
    "OHLCV_COLUMNS",
    "ParamGroup",
    "PriceSeries",
    "Scaler",
    "SplitDataset",
    "WindowSample",
]

from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing import Optional
import enum


def _dashed(name: str) -> str:
    return name.replace("_", "-")


class ModelVariant(str, enum.Enum):
    HYBRID = "hybrid"
    LSTM_ONLY = "lstm_only"
    CNN_ONLY = "cnn_only"

    @property
    def uses_lstm(self) -> bool:
        return self in (ModelVariant.HYBRID, ModelVariant.LSTM_ONLY)

    @property
    def uses_conv(self) -> bool:
        return self in (ModelVariant.HYBRID, ModelVariant.CNN_ONLY)


class IndicatorConfig(BaseModel):
    """Window lengths of the technical indicators"""
    model_config = ConfigDict(frozen=True)

    sma_n: int = Field(20, ge=1, description="SMA window (bars)")
    rsi_n: int = Field(14, ge=1, description="RSI window (bars)")
    bb_n: int = Field(20, ge=1, description="Bollinger window (bars)")
    bb_k: float = Field(2.0, ge=0, allow_inf_nan=False, description="Bollinger band multiplier")

    @property
    def warmup(self) -> int:
        """Index of the first bar on which every indicator is defined"""
        return max(self.sma_n - 1, self.rsi_n, self.bb_n - 1)

    @property
    def min_series_length(self) -> int:
        return max(self.sma_n, self.rsi_n + 1, self.bb_n) + 2


class ModelSpec(BaseModel):
    """Architecture of one predictor variant"""
    model_config = ConfigDict(frozen=True)

    variant: ModelVariant = Field(ModelVariant.HYBRID, description="Trunk variant")
    input_size: int = Field(6, ge=1, description="Features per bar (d)")
    hidden_size: int = Field(64, ge=1, description="LSTM units (H)")
    num_filters: int = Field(32, ge=1, description="Conv1D filters (F)")
    kernel_size: int = Field(3, ge=1, description="Conv1D kernel size (K)")
    lookback: int = Field(60, ge=2, description="Window length in bars (L)")

    @model_validator(mode="after")
    def check_kernel_fits(self):
        if self.kernel_size > self.lookback:
            raise ValueError(
                f"kernel_size ({self.kernel_size}) cannot exceed lookback ({self.lookback})"
            )
        return self

    @property
    def context_size(self) -> int:
        """Channel count M seen by the attention and dense head"""
        width = 0
        if self.variant.uses_lstm:
            width += self.hidden_size
        if self.variant.uses_conv:
            width += self.num_filters
        return width


class TrainConfig(BaseModel):
    """Optimizer, batching and early-stopping settings"""
    model_config = ConfigDict(frozen=True)

    learning_rate: float = Field(1e-3, gt=0, allow_inf_nan=False)
    beta1: float = Field(0.9, gt=0, lt=1, allow_inf_nan=False)
    beta2: float = Field(0.999, gt=0, lt=1, allow_inf_nan=False)
    epsilon: float = Field(1e-8, gt=0, allow_inf_nan=False)
    epochs: int = Field(100, ge=1)
    batch_size: int = Field(64, ge=1)
    seed: int = Field(0, description="Base seed; shuffling uses seed + 1")
    patience: int = Field(10, ge=0, description="Epochs without validation improvement; 0 disables")
    validation_fraction: float = Field(0.1, ge=0, lt=1, allow_inf_nan=False)


class RunConfig(BaseModel):
    """Flat union of every pipeline setting; keys match CLI flag names"""
    model_config = ConfigDict(
        alias_generator=_dashed,
        populate_by_name=True,
        extra="forbid",
        use_enum_values=False,
    )

    # Paths
    data: Optional[str] = Field(None, description="Input OHLCV CSV")
    out: Optional[str] = Field(None, description="Checkpoint output path")
    loss_history: Optional[str] = Field(None, description="Per-epoch loss CSV path")

    # Indicators
    sma_n: int = Field(20, ge=1)
    rsi_n: int = Field(14, ge=1)
    bb_n: int = Field(20, ge=1)
    bb_k: float = Field(2.0, ge=0, allow_inf_nan=False)

    # Model
    variant: ModelVariant = ModelVariant.HYBRID
    hidden_size: int = Field(64, ge=1)
    num_filters: int = Field(32, ge=1)
    kernel_size: int = Field(3, ge=1)
    lookback: int = Field(60, ge=2)

    # Split
    train_fraction: float = Field(0.8, gt=0, lt=1, allow_inf_nan=False)

    # Training
    learning_rate: float = Field(1e-3, gt=0, allow_inf_nan=False)
    beta1: float = Field(0.9, gt=0, lt=1, allow_inf_nan=False)
    beta2: float = Field(0.999, gt=0, lt=1, allow_inf_nan=False)
    epsilon: float = Field(1e-8, gt=0, allow_inf_nan=False)
    epochs: int = Field(100, ge=1)
    batch_size: int = Field(64, ge=1)
    seed: int = 0
    patience: int = Field(10, ge=0)
    validation_fraction: float = Field(0.1, ge=0, lt=1, allow_inf_nan=False)

    @model_validator(mode="after")
    def check_kernel_fits(self):
        if self.kernel_size > self.lookback:
            raise ValueError(f"kernel-size ({self.kernel_size}) cannot exceed lookback ({self.lookback})")
        return self

    def indicator_config(self) -> IndicatorConfig:
        return IndicatorConfig(sma_n=self.sma_n, rsi_n=self.rsi_n, bb_n=self.bb_n, bb_k=self.bb_k)

    def model_spec(self, variant: Optional[ModelVariant] = None, input_size: int = 6) -> ModelSpec:
        return ModelSpec(
            variant=variant or self.variant,
            input_size=input_size,
            hidden_size=self.hidden_size,
            num_filters=self.num_filters,
            kernel_size=self.kernel_size,
            lookback=self.lookback,
        )

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.learning_rate,
            beta1=self.beta1,
            beta2=self.beta2,
            epsilon=self.epsilon,
            epochs=self.epochs,
            batch_size=self.batch_size,
            seed=self.seed,
            patience=self.patience,
            validation_fraction=self.validation_fraction,
        )

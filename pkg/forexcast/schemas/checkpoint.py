from pydantic import BaseModel, Field
from typing import Any, Dict, List

from forexcast.schemas.config import IndicatorConfig, ModelSpec


class ScalerState(BaseModel):
    """Per-channel min/max of a fitted scaler (features first, target last)"""
    min: List[float]
    max: List[float]


class CheckpointMetadata(BaseModel):
    seed: int
    epochs_trained: int = Field(..., ge=0)


class Checkpoint(BaseModel):
    """Versioned, self-contained serialized model"""
    format_version: int
    spec: ModelSpec
    indicators: IndicatorConfig
    scaler: ScalerState
    tensors: Dict[str, Any] = Field(..., description="Flat parameter name -> nested decimal array")
    metadata: CheckpointMetadata

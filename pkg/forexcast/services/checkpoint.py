import json
import logging
from pathlib import Path
from typing import Tuple, Union

import numpy as np
from pydantic import ValidationError

from forexcast.config import settings
from forexcast.errors import CheckpointError, ShapeError
from forexcast.models import ModelParams, Scaler
from forexcast.schemas import Checkpoint, CheckpointMetadata, IndicatorConfig, ScalerState

logger = logging.getLogger(__name__)


def build_checkpoint(
    params: ModelParams,
    scaler: Scaler,
    indicators: IndicatorConfig,
    seed: int,
    epochs_trained: int,
) -> Checkpoint:
    return Checkpoint(
        format_version=settings.CHECKPOINT_FORMAT_VERSION,
        spec=params.spec,
        indicators=indicators,
        scaler=ScalerState(min=scaler.mins.tolist(), max=scaler.maxs.tolist()),
        tensors={name: tensor.tolist() for name, tensor in params.flat().items()},
        metadata=CheckpointMetadata(seed=seed, epochs_trained=epochs_trained),
    )


def save_checkpoint(checkpoint: Checkpoint, path: Union[str, Path]) -> None:
    """Write versioned JSON; floats use shortest round-trip formatting"""
    Path(path).write_text(checkpoint.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info(f"💾 Checkpoint written to {path}")


def load_checkpoint(path: Union[str, Path]) -> Tuple[ModelParams, Scaler, Checkpoint]:
    """Read a checkpoint, refusing unknown format versions"""
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise CheckpointError(f"{path}: not valid JSON ({e})")
    if not isinstance(raw, dict):
        raise CheckpointError(f"{path}: expected a JSON object")

    version = raw.get("format_version")
    if version != settings.CHECKPOINT_FORMAT_VERSION:
        raise CheckpointError(
            f"{path}: unsupported format_version {version!r} (expected {settings.CHECKPOINT_FORMAT_VERSION})"
        )

    try:
        checkpoint = Checkpoint.model_validate(raw)
    except ValidationError as e:
        raise CheckpointError(f"{path}: malformed checkpoint: {e.errors()[0]['msg']}")

    try:
        tensors = {name: np.array(value, dtype=np.float64) for name, value in checkpoint.tensors.items()}
        params = ModelParams.from_flat(checkpoint.spec, tensors)
    except (KeyError, TypeError, ValueError, ShapeError) as e:
        raise CheckpointError(f"{path}: tensors do not match spec: {e}")

    expected = set(params.flat())
    if set(checkpoint.tensors) != expected:
        raise CheckpointError(f"{path}: unexpected tensors {sorted(set(checkpoint.tensors) - expected)}")

    mins = np.array(checkpoint.scaler.min, dtype=np.float64)
    maxs = np.array(checkpoint.scaler.max, dtype=np.float64)
    if mins.shape != (checkpoint.spec.input_size + 1,) or maxs.shape != mins.shape:
        raise CheckpointError(f"{path}: scaler has {mins.size} channels, expected {checkpoint.spec.input_size + 1}")

    return params, Scaler(mins=mins, maxs=maxs, fitted=True), checkpoint

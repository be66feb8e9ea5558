from typing import Any, Mapping, Type, TypeVar

from pydantic import BaseModel, ValidationError

from forexcast.errors import InvalidArgumentError
from .checkpoint import Checkpoint, CheckpointMetadata, ScalerState
from .config import IndicatorConfig, ModelSpec, ModelVariant, RunConfig, TrainConfig
from .reports import EvalReport, TrainReport

SchemaT = TypeVar("SchemaT", bound=BaseModel)


def validate_config(schema: Type[SchemaT], data: Mapping[str, Any]) -> SchemaT:
    """Validate ``data`` against ``schema``, raising InvalidArgumentError on failure"""
    try:
        return schema.model_validate(dict(data))
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or schema.__name__}: {err['msg']}"
            for err in e.errors()
        )
        raise InvalidArgumentError(f"invalid {schema.__name__}: {problems}") from e


__all__ = [
    "Checkpoint",
    "CheckpointMetadata",
    "EvalReport",
    "IndicatorConfig",
    "ModelSpec",
    "ModelVariant",
    "RunConfig",
    "ScalerState",
    "TrainConfig",
    "TrainReport",
    "validate_config",
]

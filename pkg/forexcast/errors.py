"""Exception hierarchy shared by every forexcast module.

Each error carries a stable machine ``code`` and the process ``exit_code`` the CLI
returns for it: 1 for runtime/data failures, 2 for bad arguments.
"""

from typing import Optional


class ForecastError(Exception):
    """Base class for all forexcast failures"""

    code = "FORECAST_ERROR"
    exit_code = 1

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def __str__(self) -> str:
        return self.message


class InvalidArgumentError(ForecastError, ValueError):
    code = "INVALID_ARGUMENT"
    exit_code = 2


class ShapeError(ForecastError, ValueError):
    code = "SHAPE_MISMATCH"

    def __init__(self, tensor: str, expected, actual):
        super().__init__(f"{tensor}: expected shape {expected}, got {actual}")
        self.tensor = tensor
        self.expected = expected
        self.actual = actual


class InsufficientDataError(ForecastError):
    code = "INSUFFICIENT_DATA"

    def __init__(self, what: str, required: int, actual: int):
        super().__init__(f"{what}: need at least {required}, got {actual}")
        self.required = required
        self.actual = actual


class InvalidStateError(ForecastError):
    code = "INVALID_STATE"


class NumericInstabilityError(ForecastError):
    code = "NUMERIC_INSTABILITY"


class DivergenceError(ForecastError):
    code = "DIVERGENCE"

    def __init__(self, epoch: int, batch: int, loss: float):
        super().__init__(f"training diverged at epoch {epoch}, batch {batch} (loss={loss})")
        self.epoch = epoch
        self.batch = batch


class DegenerateVarianceError(ForecastError):
    code = "DEGENERATE_VARIANCE"


class CsvFormatError(ForecastError):
    code = "CSV_FORMAT"


class CsvOrderingError(ForecastError):
    code = "CSV_ORDERING"

    def __init__(self, path: str, row: int):
        super().__init__(f"{path}: timestamps not strictly increasing at row {row}")
        self.row = row


class CsvParseError(ForecastError):
    code = "CSV_PARSE"

    def __init__(self, path: str, row: int, column: str, value: Optional[str] = None):
        super().__init__(f"{path}: cannot parse column '{column}' at row {row} (value={value!r})")
        self.row = row
        self.column = column


class CandleValidationError(ForecastError):
    code = "CANDLE_INVALID"

    def __init__(self, path: str, row: int, reason: str):
        super().__init__(f"{path}: invalid candle at row {row}: {reason}")
        self.row = row


class CheckpointError(ForecastError):
    code = "CHECKPOINT"


class DimensionMismatchError(ForecastError):
    code = "DIMENSION_MISMATCH"

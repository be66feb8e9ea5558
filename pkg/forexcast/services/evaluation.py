"""Price-space metrics, test-split evaluation and the model comparison harness."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from sklearn.metrics import mean_squared_error, r2_score

from forexcast.errors import DegenerateVarianceError, ForecastError, InsufficientDataError, InvalidArgumentError
from forexcast.models import ModelParams, SplitDataset
from forexcast.schemas import EvalReport, ModelSpec, TrainConfig, TrainReport
from forexcast.services.network import PredictionRow, predict_windows
from forexcast.services.training import train

logger = logging.getLogger(__name__)

PREDICTION_COLUMNS = ("timestamp", "actual", "predicted")
COMPARISON_COLUMNS = ("variant", "mse", "rmse", "r_square", "n")


def _pair(pred: Sequence[float], actual: Sequence[float], minimum: int = 1):
    p = np.asarray(pred, dtype=np.float64).ravel()
    a = np.asarray(actual, dtype=np.float64).ravel()
    if p.shape != a.shape:
        raise InvalidArgumentError(f"predictions ({p.size}) and actuals ({a.size}) differ in length")
    if p.size < minimum:
        raise InvalidArgumentError(f"need at least {minimum} points, got {p.size}")
    if not (np.all(np.isfinite(p)) and np.all(np.isfinite(a))):
        raise InvalidArgumentError("metrics need finite values")
    return p, a


def mse(pred: Sequence[float], actual: Sequence[float]) -> float:
    p, a = _pair(pred, actual)
    return float(mean_squared_error(a, p))


def rmse(pred: Sequence[float], actual: Sequence[float]) -> float:
    return float(np.sqrt(mse(pred, actual)))


def r_square(pred: Sequence[float], actual: Sequence[float]) -> float:
    """Coefficient of determination against the mean of ``actual``"""
    p, a = _pair(pred, actual)
    if p.size < 2:
        raise DegenerateVarianceError("R-Square undefined for fewer than 2 points")
    # r2_score would quietly return 0.0 here
    if np.all(a == a[0]):
        raise DegenerateVarianceError("R-Square undefined: actual values are constant")
    return float(r2_score(a, p))


def predict_test_split(params: ModelParams, data: SplitDataset) -> List[PredictionRow]:
    """(timestamp, predicted, actual) in price units for every test window"""
    if not data.test:
        raise InsufficientDataError("test windows", 1, 0)
    inputs, targets, stamps = SplitDataset.stack(data.test)
    predicted = data.scaler.inverse_target(predict_windows(params, inputs))
    actual = data.scaler.inverse_target(targets)
    return [(int(t), float(p), float(a)) for t, p, a in zip(stamps, predicted, actual)]


def report_from_rows(rows: Sequence[PredictionRow], model_label: str, dataset_label: str) -> EvalReport:
    predicted = [r[1] for r in rows]
    actual = [r[2] for r in rows]
    error = mse(predicted, actual)
    try:
        r2 = r_square(predicted, actual)
    except DegenerateVarianceError as e:
        logger.warning(f"⚠️ {model_label} on {dataset_label}: {e}; R-Square not reported")
        r2 = None
    return EvalReport(
        model_label=model_label,
        dataset_label=dataset_label,
        n=len(rows),
        mse=error,
        rmse=float(np.sqrt(error)),
        r_square=r2,
    )


def evaluate(params: ModelParams, data: SplitDataset, model_label: Optional[str] = None) -> EvalReport:
    """MSE, RMSE and R-Square of ``params`` on the test partition, in price units"""
    rows = predict_test_split(params, data)
    return report_from_rows(rows, model_label or params.spec.variant.value, data.label)


@dataclass
class ComparisonResult:
    """One row per trained variant, in input order"""
    dataset_label: str
    reports: List[EvalReport] = field(default_factory=list)
    train_reports: List[TrainReport] = field(default_factory=list)
    predictions: Dict[str, List[PredictionRow]] = field(default_factory=dict)

    def rows(self) -> List[list]:
        return [[r.model_label, r.mse, r.rmse, r.r_square, r.n] for r in self.reports]


def compare(specs: Sequence[ModelSpec], data: SplitDataset, config: TrainConfig) -> ComparisonResult:
    """Train each spec from its own seed (config.seed + index) and evaluate on the shared test split"""
    if not specs:
        raise InvalidArgumentError("compare needs at least one model spec")
    result = ComparisonResult(dataset_label=data.label)
    for index, spec in enumerate(specs):
        label = spec.variant.value
        variant_config = config.model_copy(update={"seed": config.seed + index})
        try:
            params, train_report = train(spec, data, variant_config)
            rows = predict_test_split(params, data)
        except ForecastError as e:
            e.message = f"[{label}] {e.message}"
            e.args = (e.message,)
            raise
        result.train_reports.append(train_report)
        result.predictions[label] = rows
        result.reports.append(report_from_rows(rows, label, data.label))
        logger.info(f"📈 {label} on {data.label}: MSE {result.reports[-1].mse:.3e}")
    return result


def export_predictions_csv(rows: Sequence[PredictionRow], path: Union[str, Path]) -> None:
    """``timestamp,actual,predicted`` with 10 significant digits, timestamps ascending"""
    ordered = sorted(rows, key=lambda r: r[0])
    frame = pd.DataFrame(
        {
            "timestamp": pd.Series([r[0] for r in ordered], dtype="int64"),
            "actual": pd.Series([r[2] for r in ordered], dtype="float64"),
            "predicted": pd.Series([r[1] for r in ordered], dtype="float64"),
        },
        columns=list(PREDICTION_COLUMNS),
    )
    frame.to_csv(path, index=False, float_format="%.10g", lineterminator="\n")


def export_comparison_csv(result: ComparisonResult, path: Union[str, Path]) -> None:
    frame = pd.DataFrame(result.rows(), columns=list(COMPARISON_COLUMNS))
    frame.to_csv(path, index=False, float_format="%.10g", lineterminator="\n")

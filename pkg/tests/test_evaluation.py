import numpy as np
import pandas as pd
import pytest

from forexcast.errors import DegenerateVarianceError, DivergenceError, InsufficientDataError, InvalidArgumentError
from forexcast.models import SplitDataset
from forexcast.schemas import IndicatorConfig, ModelSpec, ModelVariant, TrainConfig
from forexcast.services.dataset import chronological_split, gen_synthetic, make_windows
from forexcast.services.evaluation import (
    COMPARISON_COLUMNS,
    PREDICTION_COLUMNS,
    compare,
    evaluate,
    export_comparison_csv,
    export_predictions_csv,
    mse,
    predict_test_split,
    r_square,
    report_from_rows,
    rmse,
)
from forexcast.services.indicators import build_feature_matrix
from forexcast.services.network import init_params, predict_windows
from forexcast.services.training import train

from .conftest import small_spec


class TestMetrics:
    def test_mse_example(self):
        assert mse([1, 2, 3], [1, 2, 5]) == pytest.approx(4 / 3)
        assert mse([1, 2, 3], [2, 3, 4]) == 1.0

    def test_rmse_is_root_of_mse(self, rng):
        pred, actual = rng.normal(size=50), rng.normal(size=50)
        assert rmse(pred, actual) ** 2 == pytest.approx(mse(pred, actual), rel=1e-12)

    def test_r_square_example(self):
        assert r_square([0, 0, 0], [0, 1, 2]) == -1.5
        assert r_square([3, 2, 1], [1, 2, 3]) == pytest.approx(-3.0)

    def test_r_square_perfect(self, rng):
        actual = rng.normal(size=30)
        assert r_square(actual, actual) == 1.0

    def test_mean_predictor_scores_zero(self, rng):
        actual = rng.normal(size=30)
        assert r_square(np.full(30, actual.mean()), actual) == pytest.approx(0.0, abs=1e-12)

    def test_r_square_is_not_symmetric(self):
        pred, actual = [1.0, 2.0, 4.0], [1.0, 3.0, 2.0]
        assert r_square(pred, actual) != pytest.approx(r_square(actual, pred))

    def test_permutation_invariant(self, rng):
        pred, actual = rng.normal(size=40), rng.normal(size=40)
        order = rng.permutation(40)
        assert mse(pred[order], actual[order]) == pytest.approx(mse(pred, actual), rel=1e-12)
        assert r_square(pred[order], actual[order]) == pytest.approx(r_square(pred, actual), rel=1e-12)

    def test_constant_actuals(self):
        with pytest.raises(DegenerateVarianceError):
            r_square([1.0, 2.0, 3.0], [2.0, 2.0, 2.0])

    def test_r_square_matches_definition(self, rng):
        pred, actual = rng.normal(size=25), rng.normal(size=25)
        expected = 1.0 - np.sum((actual - pred) ** 2) / np.sum((actual - actual.mean()) ** 2)
        assert r_square(pred, actual) == pytest.approx(expected, rel=1e-12)
        assert mse(pred, actual) == pytest.approx(np.mean((pred - actual) ** 2), rel=1e-12)

    def test_single_point(self):
        assert mse([1.0], [3.0]) == 4.0
        with pytest.raises(DegenerateVarianceError):
            r_square([1.0], [3.0])

    @pytest.mark.parametrize("pred, actual", [([], []), ([1.0, 2.0], [1.0]), ([np.nan], [1.0])])
    def test_invalid_inputs(self, pred, actual):
        with pytest.raises(InvalidArgumentError):
            mse(pred, actual)


class TestEvaluate:
    def test_price_mse_scales_by_target_span(self, small_split):
        params = init_params(small_spec(), 4)
        report = evaluate(params, small_split)

        inputs, targets, _ = SplitDataset.stack(small_split.test)
        scaled = mse(predict_windows(params, inputs), targets)
        span = small_split.scaler.maxs[-1] - small_split.scaler.mins[-1]
        assert report.mse == pytest.approx(scaled * span ** 2, rel=1e-9)
        assert report.rmse == pytest.approx(np.sqrt(report.mse), rel=1e-12)
        assert report.n == len(small_split.test)
        assert report.model_label == "hybrid" and report.dataset_label == "sine"

    def test_rows_are_in_price_units(self, small_split, sine_series):
        rows = predict_test_split(init_params(small_spec(), 0), small_split)
        closes = dict(zip(sine_series.timestamps.tolist(), sine_series.close.tolist()))
        for timestamp, _, actual in rows:
            assert actual == pytest.approx(closes[timestamp], rel=1e-12)

    def test_empty_test_split(self, small_split):
        empty = SplitDataset(
            train=small_split.train,
            test=[],
            scaler=small_split.scaler,
            lookback=small_split.lookback,
            width=small_split.width,
            train_fraction=small_split.train_fraction,
        )
        with pytest.raises(InsufficientDataError):
            evaluate(init_params(small_spec(), 0), empty)

    def test_degenerate_actuals_report_no_r_square(self):
        rows = [(1, 1.1, 1.0), (2, 0.9, 1.0)]
        report = report_from_rows(rows, "hybrid", "flat")
        assert report.r_square is None
        assert report.mse == pytest.approx(0.01)


class TestCompare:
    def test_shared_test_split(self, small_split, quick_train_config):
        specs = [small_spec(variant) for variant in ModelVariant]
        result = compare(specs, small_split, quick_train_config)

        assert [r.model_label for r in result.reports] == ["hybrid", "lstm_only", "cnn_only"]
        assert {r.n for r in result.reports} == {len(small_split.test)}
        stamps = [[row[0] for row in result.predictions[r.model_label]] for r in result.reports]
        assert stamps[0] == stamps[1] == stamps[2]
        assert len(result.rows()) == 3

    def test_single_spec_matches_train_then_evaluate(self, small_split, quick_train_config):
        spec = small_spec(ModelVariant.LSTM_ONLY)
        result = compare([spec], small_split, quick_train_config)

        params, _ = train(spec, small_split, quick_train_config)
        expected = evaluate(params, small_split)
        assert result.reports[0].model_dump() == expected.model_dump()

    def test_variants_use_offset_seeds(self, small_split, quick_train_config):
        specs = [small_spec(ModelVariant.CNN_ONLY), small_spec(ModelVariant.CNN_ONLY)]
        result = compare(specs, small_split, quick_train_config)

        shifted = quick_train_config.model_copy(update={"seed": quick_train_config.seed + 1})
        params, _ = train(specs[1], small_split, shifted)
        assert result.reports[1].mse == evaluate(params, small_split).mse

    def test_needs_a_spec(self, small_split, quick_train_config):
        with pytest.raises(InvalidArgumentError):
            compare([], small_split, quick_train_config)

    def test_failure_names_the_variant(self, small_split):
        config = TrainConfig(learning_rate=1e200, epochs=2, batch_size=16, patience=0)
        with pytest.raises(DivergenceError) as info:
            compare([small_spec(ModelVariant.CNN_ONLY)], small_split, config)
        assert "[cnn_only]" in str(info.value)

    @pytest.mark.slow
    def test_generalizes_on_noisy_sine(self):
        indicators = IndicatorConfig()
        series = gen_synthetic("sine", 2000, seed=0, noise=0.002)
        samples = make_windows(build_feature_matrix(series, indicators), 60)
        data = chronological_split(samples, 0.8, label="sine")
        specs = [ModelSpec(variant=variant) for variant in ModelVariant]

        result = compare(specs, data, TrainConfig())
        for report in result.reports:
            assert report.r_square >= 0.95, report.model_label


class TestExport:
    def test_empty_predictions_write_header(self, tmp_path):
        path = tmp_path / "empty.csv"
        export_predictions_csv([], path)
        assert path.read_text() == ",".join(PREDICTION_COLUMNS) + "\n"

    def test_predictions_csv(self, tmp_path, rng):
        rows = [(1000 + 3600 * i, float(p), float(a)) for i, (p, a) in enumerate(rng.uniform(1, 2, (10, 2)))]
        path = tmp_path / "pred.csv"
        export_predictions_csv(list(reversed(rows)), path)

        lines = path.read_text().splitlines()
        assert len(lines) == 11
        assert lines[0] == "timestamp,actual,predicted"

        frame = pd.read_csv(path)
        assert frame["timestamp"].tolist() == [r[0] for r in rows]
        np.testing.assert_allclose(frame["predicted"], [r[1] for r in rows], rtol=1e-9)
        np.testing.assert_allclose(frame["actual"], [r[2] for r in rows], rtol=1e-9)

    def test_comparison_csv(self, tmp_path, small_split, quick_train_config):
        result = compare([small_spec(ModelVariant.CNN_ONLY)], small_split, quick_train_config)
        path = tmp_path / "compare.csv"
        export_comparison_csv(result, path)

        frame = pd.read_csv(path)
        assert tuple(frame.columns) == COMPARISON_COLUMNS
        assert frame["variant"].tolist() == ["cnn_only"]
        assert frame["n"].tolist() == [len(small_split.test)]
        assert frame["mse"][0] == pytest.approx(result.reports[0].mse, rel=1e-9)

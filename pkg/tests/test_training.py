import numpy as np
import pytest

from forexcast.errors import DivergenceError, InvalidArgumentError, ShapeError
from forexcast.models import GradientSet, SplitDataset
from forexcast.schemas import IndicatorConfig, ModelSpec, ModelVariant, TrainConfig
from forexcast.services.dataset import chronological_split, gen_synthetic, make_windows
from forexcast.services.indicators import build_feature_matrix
from forexcast.services.network import init_params, model_backward, model_forward, predict_windows
from forexcast.services.training import AdamState, adam_step, mse_loss, train

from .conftest import small_spec


def comparable(report):
    return report.model_dump(exclude={"wall_time"})


class TestMseLoss:
    def test_perfect_fit(self):
        loss, grad = mse_loss([0.3, 0.4], [0.3, 0.4])
        assert loss == 0.0
        assert not grad.any()

    def test_single_point(self):
        loss, grad = mse_loss([1.0], [0.0])
        assert loss == 1.0
        np.testing.assert_array_equal(grad, [2.0])

    def test_two_points(self):
        loss, grad = mse_loss([1.0, 3.0], [0.0, 0.0])
        assert loss == 5.0
        np.testing.assert_array_equal(grad, [1.0, 3.0])

    @pytest.mark.parametrize("pred, target", [([], []), ([1.0], [1.0, 2.0])])
    def test_invalid_lengths(self, pred, target):
        with pytest.raises(InvalidArgumentError):
            mse_loss(pred, target)


class TestAdam:
    def constant_grads(self, params, value):
        return GradientSet.from_flat({name: np.full_like(t, value) for name, t in params.flat().items()})

    def test_zero_gradient_is_identity(self):
        params = init_params(small_spec(), 0)
        updated, state = adam_step(params, self.constant_grads(params, 0.0), AdamState.zeros_like(params),
                                   TrainConfig())
        for name, tensor in params.flat().items():
            np.testing.assert_array_equal(updated.flat()[name], tensor)
        assert state.t == 1

    @pytest.mark.parametrize("c", [0.5, -3.0])
    def test_first_step_magnitude(self, c):
        params = init_params(small_spec(ModelVariant.CNN_ONLY), 1)
        config = TrainConfig(learning_rate=0.01)
        updated, _ = adam_step(params, self.constant_grads(params, c), AdamState.zeros_like(params), config)
        for name, tensor in params.flat().items():
            step = updated.flat()[name] - tensor
            np.testing.assert_allclose(step, -0.01 * c / (abs(c) + 1e-8), rtol=1e-9)

    def test_scripted_trajectory(self):
        params = init_params(small_spec(ModelVariant.CNN_ONLY), 2)
        config = TrainConfig(learning_rate=0.1, beta1=0.9, beta2=0.999, epsilon=1e-8)
        grads = self.constant_grads(params, 1.0)

        theta = {name: t.copy() for name, t in params.flat().items()}
        m = v = 0.0
        state = AdamState.zeros_like(params)
        for t in range(1, 4):
            params, state = adam_step(params, grads, state, config)
            m = 0.9 * m + 0.1 * 1.0
            v = 0.999 * v + 0.001 * 1.0
            delta = 0.1 * (m / (1 - 0.9 ** t)) / (np.sqrt(v / (1 - 0.999 ** t)) + 1e-8)
            theta = {name: value - delta for name, value in theta.items()}
            assert state.t == t
        for name, value in theta.items():
            np.testing.assert_allclose(params.flat()[name], value, rtol=0, atol=1e-12)

    def test_mismatched_gradients(self):
        params = init_params(small_spec(), 0)
        other = init_params(small_spec(ModelVariant.LSTM_ONLY), 0)
        with pytest.raises(ShapeError):
            adam_step(params, self.constant_grads(other, 1.0), AdamState.zeros_like(params), TrainConfig())


class TestBatchGradient:
    def test_batch_mean_equals_per_sample_mean(self, small_split):
        params = init_params(small_spec(), 7)
        inputs, targets, _ = SplitDataset.stack(small_split.train[:12])

        predictions, trace = model_forward(params, inputs)
        _, d_pred = mse_loss(predictions, targets)
        batch = model_backward(params, trace, d_pred).flat()

        total = {name: np.zeros_like(t) for name, t in batch.items()}
        for x, y in zip(inputs, targets):
            prediction, single_trace = model_forward(params, x)
            _, d_single = mse_loss([prediction], [y])
            for name, tensor in model_backward(params, single_trace, d_single).flat().items():
                total[name] += tensor
        for name, tensor in batch.items():
            np.testing.assert_allclose(tensor, total[name] / len(targets), rtol=0, atol=1e-10)


class TestTrain:
    def test_deterministic(self, small_split, quick_train_config):
        spec = small_spec()
        first_params, first_report = train(spec, small_split, quick_train_config)
        second_params, second_report = train(spec, small_split, quick_train_config)
        assert comparable(first_report) == comparable(second_report)
        for name, tensor in first_params.flat().items():
            assert tensor.tobytes() == second_params.flat()[name].tobytes()

    def test_report_shape(self, small_split, quick_train_config):
        _, report = train(small_spec(), small_split, quick_train_config)
        assert report.epochs_run == 3
        assert len(report.train_loss) == 3 and len(report.val_loss) == 3
        assert all(np.isfinite(report.train_loss)) and min(report.train_loss) >= 0
        assert report.best_epoch == 3 and not report.stopped_early
        assert report.wall_time >= 0

    def test_single_full_batch_epoch_is_one_adam_step(self, small_split):
        spec = small_spec()
        config = TrainConfig(learning_rate=1e-2, epochs=1, batch_size=10_000, seed=3, patience=0,
                             validation_fraction=0.0)
        trained, _ = train(spec, small_split, config)

        params = init_params(spec, config.seed)
        inputs, targets, _ = SplitDataset.stack(small_split.train)
        predictions, trace = model_forward(params, inputs)
        _, d_pred = mse_loss(predictions, targets)
        expected, _ = adam_step(params, model_backward(params, trace, d_pred), AdamState.zeros_like(params), config)
        for name, tensor in expected.flat().items():
            # shuffled summation order; near-zero gradients are amplified by Adam's normalisation
            np.testing.assert_allclose(trained.flat()[name], tensor, rtol=0, atol=1e-9)

    def test_without_validation(self, small_split):
        config = TrainConfig(epochs=2, batch_size=32, validation_fraction=0.0, patience=5)
        _, report = train(small_spec(ModelVariant.CNN_ONLY), small_split, config)
        assert report.val_loss == []
        assert report.best_epoch == report.epochs_run == 2

    def test_early_stopping_keeps_best_parameters(self, small_split):
        config = TrainConfig(learning_rate=0.05, epochs=25, batch_size=8, seed=1, patience=2,
                             validation_fraction=0.2)
        params, report = train(small_spec(), small_split, config)

        assert report.epochs_run <= 25
        assert report.val_loss[report.best_epoch - 1] == min(report.val_loss)
        if report.stopped_early:
            assert report.epochs_run == report.best_epoch + 2

        inputs, targets, _ = SplitDataset.stack(small_split.train)
        n_val = int(np.floor(0.2 * len(inputs)))
        val_loss, _ = mse_loss(predict_windows(params, inputs[-n_val:]), targets[-n_val:])
        assert val_loss == pytest.approx(min(report.val_loss), rel=1e-12)

    def test_divergence_reports_epoch(self, small_split):
        config = TrainConfig(learning_rate=1e200, epochs=3, batch_size=16, patience=0)
        with pytest.raises(DivergenceError) as info:
            train(small_spec(ModelVariant.CNN_ONLY), small_split, config)
        assert info.value.epoch == 1

    def test_divergence_in_final_update(self, small_split):
        config = TrainConfig(learning_rate=1e200, epochs=1, batch_size=10_000, patience=0,
                             validation_fraction=0.0)
        with pytest.raises(DivergenceError) as info:
            train(small_spec(ModelVariant.CNN_ONLY), small_split, config)
        assert (info.value.epoch, info.value.batch) == (1, 1)

    def test_spec_must_match_windows(self, small_split, quick_train_config):
        with pytest.raises(ShapeError):
            train(small_spec(lookback=8), small_split, quick_train_config)

    @pytest.mark.slow
    def test_overfits_small_sine(self):
        indicators = IndicatorConfig()
        lookback = 24
        # 80 windows, the first 64 of which train
        bars = 80 + lookback - 1 + indicators.warmup + 1
        series = gen_synthetic("sine", bars, seed=0, noise=0.0)
        samples = make_windows(build_feature_matrix(series, indicators), lookback)
        data = chronological_split(samples, 0.8)
        assert len(data.train) == 64

        spec = ModelSpec(hidden_size=16, num_filters=8, kernel_size=3, lookback=lookback)
        config = TrainConfig(learning_rate=1e-3, epochs=2000, batch_size=16, seed=0, patience=0,
                             validation_fraction=0.0)
        params, report = train(spec, data, config)

        inputs, targets, _ = SplitDataset.stack(data.train)
        final, _ = mse_loss(predict_windows(params, inputs), targets)
        assert final < 1e-5
        assert np.isfinite(report.train_loss).all()

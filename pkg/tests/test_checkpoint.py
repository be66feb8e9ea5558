import json

import numpy as np
import pytest

from forexcast.errors import CheckpointError
from forexcast.models import SplitDataset
from forexcast.schemas import ModelVariant
from forexcast.services.checkpoint import build_checkpoint, load_checkpoint, save_checkpoint
from forexcast.services.dataset import make_windows
from forexcast.services.indicators import build_feature_matrix
from forexcast.services.network import init_params, predict_windows
from forexcast.services.training import train

from .conftest import SMALL_INDICATORS, small_spec


@pytest.fixture
def trained(small_split, quick_train_config):
    params, report = train(small_spec(), small_split, quick_train_config)
    checkpoint = build_checkpoint(params, small_split.scaler, SMALL_INDICATORS, quick_train_config.seed,
                                  report.epochs_run)
    return params, checkpoint


def test_round_trip_preserves_predictions(tmp_path, small_split, trained):
    params, checkpoint = trained
    path = tmp_path / "model.json"
    save_checkpoint(checkpoint, path)
    loaded, scaler, restored = load_checkpoint(path)

    samples = small_split.train + small_split.test
    inputs, _, _ = SplitDataset.stack(samples[:100])
    np.testing.assert_allclose(predict_windows(loaded, inputs), predict_windows(params, inputs), rtol=0, atol=1e-9)
    np.testing.assert_array_equal(scaler.mins, small_split.scaler.mins)
    np.testing.assert_array_equal(scaler.maxs, small_split.scaler.maxs)
    assert restored.indicators == SMALL_INDICATORS
    assert restored.metadata.epochs_trained == 3


def test_save_is_byte_stable(tmp_path, trained):
    _, checkpoint = trained
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    save_checkpoint(checkpoint, first)
    save_checkpoint(checkpoint, second)
    assert first.read_bytes() == second.read_bytes()


def test_baseline_omits_absent_component(tmp_path, small_split):
    params = init_params(small_spec(ModelVariant.LSTM_ONLY), 0)
    path = tmp_path / "lstm.json"
    save_checkpoint(build_checkpoint(params, small_split.scaler, SMALL_INDICATORS, 0, 0), path)

    tensors = json.loads(path.read_text())["tensors"]
    assert not any(name.startswith("conv.") for name in tensors)
    loaded, _, _ = load_checkpoint(path)
    assert loaded.conv is None and loaded.spec.variant is ModelVariant.LSTM_ONLY


def test_loaded_scaler_matches_fresh_features(tmp_path, sine_series, small_split, trained):
    _, checkpoint = trained
    path = tmp_path / "model.json"
    save_checkpoint(checkpoint, path)
    _, scaler, restored = load_checkpoint(path)

    features = build_feature_matrix(sine_series, restored.indicators)
    assert len(make_windows(features, restored.spec.lookback)) == len(small_split.train) + len(small_split.test)
    assert scaler.width == features.width


def rewrite(path, mutate):
    raw = json.loads(path.read_text())
    mutate(raw)
    path.write_text(json.dumps(raw))
    return path


@pytest.mark.parametrize(
    "mutate, fragment",
    [
        (lambda raw: raw.update(format_version=99), "format_version"),
        (lambda raw: raw.pop("format_version"), "format_version"),
        (lambda raw: raw.pop("metadata"), "malformed"),
        (lambda raw: raw["tensors"].pop("dense.w_d"), "tensors"),
        (lambda raw: raw["tensors"].update({"dense.w_d": [1.0]}), "tensors"),
        (lambda raw: raw["tensors"].update({"conv.extra": [1.0]}), "tensors"),
        (lambda raw: raw["scaler"].update(min=[0.0]), "scaler"),
    ],
)
def test_rejects_bad_checkpoints(tmp_path, trained, mutate, fragment):
    _, checkpoint = trained
    path = tmp_path / "model.json"
    save_checkpoint(checkpoint, path)
    rewrite(path, mutate)
    with pytest.raises(CheckpointError) as info:
        load_checkpoint(path)
    assert fragment in str(info.value)


@pytest.mark.parametrize("text", ["not json", "[1, 2]"])
def test_rejects_non_objects(tmp_path, text):
    path = tmp_path / "broken.json"
    path.write_text(text)
    with pytest.raises(CheckpointError):
        load_checkpoint(path)


def test_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_checkpoint(tmp_path / "absent.json")

import argparse
import logging
from pathlib import Path

import pandas as pd

from forexcast.commands.common import (
    INDICATOR_OPTIONS,
    MODEL_OPTIONS,
    SPLIT_OPTIONS,
    TRAIN_OPTIONS,
    add_config_option,
    add_options,
    load_run_config,
    prepare_split,
)
from forexcast.errors import InvalidArgumentError
from forexcast.models import FEATURE_NAMES
from forexcast.schemas import ModelVariant, TrainReport
from forexcast.services.checkpoint import build_checkpoint, save_checkpoint
from forexcast.services.training import train

logger = logging.getLogger(__name__)

LOSS_COLUMNS = ("epoch", "train_loss", "val_loss")


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "train",
        help="train one model variant and write a checkpoint",
        description="load -> featurize -> window -> split -> train; writes the checkpoint and a loss CSV.",
    )
    parser.add_argument("--data", default=argparse.SUPPRESS, help="input OHLCV CSV")
    parser.add_argument("--out", default=argparse.SUPPRESS, help="checkpoint JSON path")
    parser.add_argument("--loss-history", default=argparse.SUPPRESS,
                        help="per-epoch loss CSV (default: <out>.loss.csv)")
    parser.add_argument("--variant", choices=[v.value for v in ModelVariant], default=argparse.SUPPRESS,
                        help="model variant (default hybrid)")
    add_config_option(parser)
    add_options(parser, "indicators", INDICATOR_OPTIONS)
    add_options(parser, "model", MODEL_OPTIONS)
    add_options(parser, "split", SPLIT_OPTIONS)
    add_options(parser, "training", TRAIN_OPTIONS)
    parser.set_defaults(handler=run)


def default_loss_path(checkpoint_path: str) -> Path:
    path = Path(checkpoint_path)
    return path.with_name(f"{path.stem}.loss.csv")


def save_loss_history(report: TrainReport, path) -> None:
    """``epoch,train_loss,val_loss``; val_loss stays empty without a validation slice"""
    epochs = range(1, len(report.train_loss) + 1)
    val = report.val_loss if report.val_loss else [None] * len(report.train_loss)
    frame = pd.DataFrame({"epoch": list(epochs), "train_loss": report.train_loss, "val_loss": val},
                         columns=list(LOSS_COLUMNS))
    frame.to_csv(path, index=False, lineterminator="\n")


def run(args: argparse.Namespace) -> int:
    config = load_run_config(args)
    if not config.data:
        raise InvalidArgumentError("train needs --data (flag or config key)")
    if not config.out:
        raise InvalidArgumentError("train needs --out (flag or config key)")

    spec = config.model_spec(input_size=len(FEATURE_NAMES))
    train_config = config.train_config()
    data = prepare_split(config, config.data)
    params, report = train(spec, data, train_config)

    checkpoint = build_checkpoint(params, data.scaler, config.indicator_config(), train_config.seed,
                                  report.epochs_run)
    save_checkpoint(checkpoint, config.out)
    loss_path = config.loss_history or default_loss_path(config.out)
    save_loss_history(report, loss_path)

    val = f"{report.final_val_loss:.6e}" if report.final_val_loss is not None else "n/a"
    print(f"✅ {spec.variant.value}: {report.epochs_run} epochs in {report.wall_time:.1f}s "
          f"(best epoch {report.best_epoch}{', stopped early' if report.stopped_early else ''})")
    print(f"   final train loss {report.final_train_loss:.6e}, final val loss {val}")
    print(f"   checkpoint {config.out}, loss history {loss_path}")
    return 0

import argparse
import logging

from forexcast.commands.common import load_features, score_rows
from forexcast.services.checkpoint import load_checkpoint
from forexcast.services.evaluation import export_predictions_csv

logger = logging.getLogger(__name__)


def add_scoring_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--checkpoint", required=True, help="checkpoint JSON written by train")
    parser.add_argument("--data", required=True, help="OHLCV CSV to score")
    parser.add_argument(
        "--train-fraction",
        type=float,
        default=None,
        help="score only windows after this chronological share (the train split's test tail)",
    )


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "predict",
        help="write predicted-vs-actual closes for every window",
        description="Apply a checkpoint (its indicators and scaler) to an OHLCV CSV.",
    )
    add_scoring_options(parser)
    parser.add_argument("--out", required=True, help="predictions CSV path")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    params, scaler, checkpoint = load_checkpoint(args.checkpoint)
    features = load_features(args.data, checkpoint.indicators)
    rows = score_rows(params, scaler, features, args.train_fraction)
    export_predictions_csv(rows, args.out)
    print(f"✅ Wrote {len(rows)} predictions to {args.out}")
    return 0

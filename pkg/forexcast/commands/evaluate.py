import argparse
import logging
from typing import Optional

from forexcast.commands.common import dataset_label, load_features, score_rows
from forexcast.commands.predict import add_scoring_options
from forexcast.schemas import EvalReport
from forexcast.services.checkpoint import load_checkpoint
from forexcast.services.evaluation import report_from_rows

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "evaluate",
        help="print MSE, RMSE and R-Square of a checkpoint on a CSV",
        description="Score the same windows predict would write and report price-space metrics.",
    )
    add_scoring_options(parser)
    parser.add_argument("--json", action="store_true", help="print the report as JSON")
    parser.set_defaults(handler=run)


def window_scope(train_fraction: Optional[float]) -> str:
    if train_fraction is None:
        return "windows: all, training windows included (pass --train-fraction to score the test tail)"
    return f"windows: test tail after train fraction {train_fraction:g}"


def format_report(report: EvalReport, train_fraction: Optional[float] = None) -> str:
    r2 = f"{report.r_square:.5f}" if report.r_square is not None else "undefined"
    return "\n".join([
        f"{report.model_label} on {report.dataset_label} (n={report.n})",
        window_scope(train_fraction),
        f"MSE: {report.mse:.6e}",
        f"RMSE: {report.rmse:.6e}",
        f"R-Square: {r2}",
    ])


def run(args: argparse.Namespace) -> int:
    params, scaler, checkpoint = load_checkpoint(args.checkpoint)
    features = load_features(args.data, checkpoint.indicators)
    rows = score_rows(params, scaler, features, args.train_fraction)
    report = report_from_rows(rows, checkpoint.spec.variant.value, dataset_label(args.data))
    if args.train_fraction is None:
        logger.warning("⚠️ Scoring every window; metrics include the windows the model trained on")
    print(report.model_dump_json(indent=2) if args.json else format_report(report, args.train_fraction))
    return 0

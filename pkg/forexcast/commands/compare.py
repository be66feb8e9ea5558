import argparse
import logging
from pathlib import Path

from rich import box
from rich.console import Console
from rich.table import Table

from forexcast.commands.common import (
    INDICATOR_OPTIONS,
    MODEL_OPTIONS,
    SPLIT_OPTIONS,
    TRAIN_OPTIONS,
    add_config_option,
    add_options,
    load_run_config,
    parse_variants,
    prepare_split,
)
from forexcast.errors import InvalidArgumentError
from forexcast.models import FEATURE_NAMES
from forexcast.schemas import ModelVariant
from forexcast.services.evaluation import ComparisonResult, compare, export_comparison_csv, export_predictions_csv

logger = logging.getLogger(__name__)

console = Console()


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "compare",
        help="train several variants and print an MSE/RMSE/R-Square table per dataset",
        description="Each variant trains from seed + index and is scored on the shared test split.",
    )
    parser.add_argument("--data", dest="data_files", nargs="+", action="extend", default=None,
                        help="one or more OHLCV CSVs; each gets its own table, labeled by file stem")
    parser.add_argument("--variants", type=parse_variants,
                        default=[ModelVariant.HYBRID, ModelVariant.LSTM_ONLY, ModelVariant.CNN_ONLY],
                        help="comma-separated variants (default hybrid,lstm_only,cnn_only)")
    parser.add_argument("--out-csv", default=None,
                        help="comparison CSV; with several datasets, <stem>_<dataset><suffix> per dataset")
    parser.add_argument("--predictions-dir", default=None,
                        help="directory for <dataset>_<variant>.csv predicted-vs-actual files")
    add_config_option(parser)
    add_options(parser, "indicators", INDICATOR_OPTIONS)
    add_options(parser, "model", MODEL_OPTIONS)
    add_options(parser, "split", SPLIT_OPTIONS)
    add_options(parser, "training", TRAIN_OPTIONS)
    parser.set_defaults(handler=run)


def render_table(result: ComparisonResult) -> Table:
    table = Table(title=f"{result.dataset_label} test split", box=box.SIMPLE_HEAVY)
    table.add_column("model")
    table.add_column("MSE", justify="right")
    table.add_column("RMSE", justify="right")
    table.add_column("R-Square", justify="right")
    table.add_column("n", justify="right")
    for label, mse, rmse, r2, n in result.rows():
        table.add_row(label, f"{mse:.3e}", f"{rmse:.5f}", "undefined" if r2 is None else f"{r2:.5f}", str(n))
    return table


def comparison_csv_path(out_csv: str, dataset: str, several: bool) -> Path:
    path = Path(out_csv)
    return path.with_name(f"{path.stem}_{dataset}{path.suffix}") if several else path


def run(args: argparse.Namespace) -> int:
    config = load_run_config(args)
    files = args.data_files or ([config.data] if config.data else [])
    if not files:
        raise InvalidArgumentError("compare needs at least one --data file")
    labels = [Path(f).stem for f in files]
    if len(set(labels)) != len(labels):
        raise InvalidArgumentError(f"dataset file stems must be distinct, got {labels}")

    specs = [config.model_spec(variant, input_size=len(FEATURE_NAMES)) for variant in args.variants]
    train_config = config.train_config()
    predictions_dir = Path(args.predictions_dir) if args.predictions_dir else None
    if predictions_dir is not None:
        predictions_dir.mkdir(parents=True, exist_ok=True)

    for path in files:
        data = prepare_split(config, path)
        result = compare(specs, data, train_config)
        console.print(render_table(result))

        if args.out_csv:
            export_comparison_csv(result, comparison_csv_path(args.out_csv, data.label, len(files) > 1))
        if predictions_dir is not None:
            for variant, rows in result.predictions.items():
                export_predictions_csv(rows, predictions_dir / f"{data.label}_{variant}.csv")
    return 0

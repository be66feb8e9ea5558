import argparse
import logging

from forexcast.commands.common import INDICATOR_OPTIONS, add_config_option, add_options, load_features, load_run_config
from forexcast.services.dataset import save_features_csv

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "featurize",
        help="write the indicator feature matrix of an OHLCV CSV",
        description="Compute close/SMA/RSI/Bollinger rows with next-close targets, warm-up rows dropped.",
    )
    parser.add_argument("--data", required=True, help="input OHLCV CSV")
    parser.add_argument("--out", required=True, help="features CSV path")
    add_config_option(parser)
    add_options(parser, "indicators", INDICATOR_OPTIONS)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    config = load_run_config(args)
    features = load_features(args.data, config.indicator_config())
    save_features_csv(features, args.out)
    print(f"✅ Wrote {len(features)} feature rows to {args.out}")
    return 0

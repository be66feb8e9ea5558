import argparse
import logging

from forexcast.services.dataset import MAX_SYNTH_NOISE, MIN_SYNTH_BARS, SynthKind, gen_synthetic, save_ohlc_csv

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "synth",
        help="write a seeded synthetic OHLCV CSV",
        description="Generate a sine or random-walk hourly series and write it in the OHLCV schema.",
    )
    parser.add_argument("--kind", choices=[k.value for k in SynthKind], default=SynthKind.SINE.value,
                        help="series shape (default sine)")
    parser.add_argument("--bars", type=int, required=True, help=f"number of bars (>= {MIN_SYNTH_BARS})")
    parser.add_argument("--seed", type=int, default=0, help="generator seed (default 0)")
    parser.add_argument("--noise", type=float, default=0.0,
                        help=f"noise amplitude in [0, {MAX_SYNTH_NOISE}] (default 0)")
    parser.add_argument("--out", required=True, help="output CSV path")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    series = gen_synthetic(args.kind, args.bars, args.seed, args.noise)
    save_ohlc_csv(series, args.out)
    print(f"✅ Wrote {len(series)} {args.kind} bars to {args.out}")
    return 0

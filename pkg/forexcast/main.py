"""Command-line entry point: ``python -m forexcast <command>``."""

import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from forexcast.commands import COMMANDS
from forexcast.config import configure_logging, settings
from forexcast.errors import ForecastError, InvalidArgumentError

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.APP_NAME,
        description="Next-close forex forecasting with hybrid LSTM/Conv1D/attention models",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.VERSION}")
    parser.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        type=str.upper,
        default=None,
        help=f"override FOREXCAST_LOG_LEVEL (currently {settings.LOG_LEVEL})",
    )
    subparsers = parser.add_subparsers(dest="command", metavar="command", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def _fail(code: str, message: str, exit_code: int) -> int:
    print(f"❌ {code}: {message}", file=sys.stderr)
    return exit_code


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors and 0 for --help/--version
        return e.code if isinstance(e.code, int) else 2

    configure_logging(args.log_level)
    logger.debug(f"🚀 {settings.APP_NAME} {settings.VERSION} running {args.command} ({settings.ENVIRONMENT})")

    # Global exception handler
    try:
        return args.handler(args)
    except InvalidArgumentError as e:
        parser.print_usage(sys.stderr)
        return _fail(e.code, e.message, e.exit_code)
    except ForecastError as e:
        logger.debug("command failed", exc_info=True)
        return _fail(e.code, e.message, e.exit_code)
    except ValidationError as e:
        return _fail(InvalidArgumentError.code, str(e), InvalidArgumentError.exit_code)
    except OSError as e:
        where = e.filename if e.filename is not None else ""
        return _fail("IO_ERROR", f"{where}: {e.strerror or e}" if where else str(e), 1)


if __name__ == "__main__":
    sys.exit(main())

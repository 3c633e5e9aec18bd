import argparse
import sys

from src import __version__
from src.config import get_settings
from src.handlers import register_handlers
from src.handlers.errors import run_handler
from src.utils.logger import logger, setup_logger


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fmqsync",
        description="Phase synchronization of a frequency-modulated qubit in a Lorentzian reservoir.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="overrides LOG_LEVEL")
    subparsers = parser.add_subparsers(dest="command", metavar="command", required=True)
    register_handlers(subparsers)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.log_level:
        setup_logger(args.log_level)
    settings = get_settings()
    logger.debug("Settings: output_dir=%s sync_epsilon=%g workers=%d", settings.output_dir, settings.sync_epsilon, settings.max_workers)
    code = run_handler(args.handler, args)
    logger.debug("%s finished with exit code %d", args.command, code)
    return code


if __name__ == "__main__":
    sys.exit(main())

import argparse
import logging
import sys
from typing import Optional, Sequence

from src import __version__
from src.api.commands import COMMANDS
from src.core.config import settings
from src.core.exceptions import EXIT_OK, LayerbenchError, exit_code_for

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="layerbench",
        description="Semisynthetic data from layered causal graphs and causal discovery benchmarks",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--log-level",
        default=settings.log_level,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging verbosity (default from LAYERBENCH_LOG_LEVEL)",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for register in COMMANDS:
        register(subparsers)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    # Configure logging
    logging.basicConfig(
        level=args.log_level, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    )
    # Suppress noisy worker-pool messages
    logging.getLogger("joblib").setLevel(logging.WARNING)

    try:
        args.handler(args)
    except (LayerbenchError, OSError, ValueError, ArithmeticError) as exc:
        logger.error(f"{args.command} failed: {exc}")
        return exit_code_for(exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""
slicedmk CLI - sliced (p,q)-Monge-Kantorovich distances and their verification suite.

Compute distances, constants and dual certificates, run the numeric checks,
sampling-rate experiments and barycenter solves, and browse the run history.
"""

import argparse
import json
import logging
import sqlite3
import sys

from rich.logging import RichHandler

from . import __version__
from .cli_args import (
    default_ledger,
    default_seed,
    default_threads,
    err_console,
    run_parameters,
)
from .errors import ResourceCapError, SlicedMKError
from .ledger import RunLedger

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2
EXIT_RESOURCE = 3
EXIT_INTERRUPTED = 130


def configure_logging(verbosity: int) -> None:
    """Route library logging through rich; WARNING by default, -v INFO, -vv DEBUG."""
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=err_console, show_path=verbosity >= 2)],
        force=True,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slicedmk",
        description="Sliced (p,q)-Monge-Kantorovich metrics and their verification suite",
        epilog="For more help on a specific command, run: slicedmk <COMMAND> --help",
    )

    parser.add_argument(
        "--version",
        action="version",
        version=f"slicedmk {__version__}",
    )
    parser.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="Log progress (-v) or solver details (-vv) to stderr",
    )
    parser.add_argument(
        "--threads",
        type=int,
        default=default_threads(),
        metavar="T",
        help="Worker threads for direction chunks (default: $SLICEDMK_THREADS or all cores)",
    )
    parser.add_argument(
        "--seed",
        type=int,
        default=default_seed(),
        help="Base seed for every random draw (default: $SLICEDMK_SEED or 42)",
    )
    parser.add_argument(
        "--out-dir",
        default=".",
        metavar="DIR",
        help="Directory for result files and manifest.json (default: current directory)",
    )
    parser.add_argument(
        "--ledger",
        default=default_ledger(),
        metavar="PATH",
        help="SQLite run ledger (default: $SLICEDMK_LEDGER or slicedmk_runs.db)",
    )

    subparsers = parser.add_subparsers(
        title="commands",
        description="Available commands",
        dest="command",
        required=False,
        help="Command to run",
    )

    from .cli_barycenter import setup_barycenter_parser
    from .cli_distance import setup_distance_parser
    from .cli_experiments import setup_experiments_parser
    from .cli_runs import setup_runs_parser
    from .cli_verify import setup_verify_parser

    setup_distance_parser(subparsers)
    setup_verify_parser(subparsers)
    setup_experiments_parser(subparsers)
    setup_barycenter_parser(subparsers)
    setup_runs_parser(subparsers)
    return parser


def _open_ledger(path: str) -> RunLedger | None:
    try:
        return RunLedger(path)
    except (sqlite3.Error, OSError) as e:
        logger.warning("run ledger %s unavailable: %s", path, e)
        return None


def _report(ledger: RunLedger | None, run_id: int | None, command: str, error: Exception):
    err_console.print(f"[red]Error:[/] {error}", highlight=False)
    if ledger is None:
        return
    try:
        ledger.log_error(type(error).__name__, str(error), command, run_id)
    except sqlite3.Error as e:
        logger.warning("could not log error to ledger: %s", e)


def _dispatch(args: argparse.Namespace, ledger: RunLedger | None, run_id: int | None) -> int:
    try:
        return args.func(args)
    except KeyboardInterrupt:
        err_console.print("\n\nInterrupted by user")
        return EXIT_INTERRUPTED
    except ResourceCapError as e:
        _report(ledger, run_id, args.command, e)
        return EXIT_RESOURCE
    except (SlicedMKError, OSError, json.JSONDecodeError) as e:
        _report(ledger, run_id, args.command, e)
        return EXIT_INPUT
    except Exception as e:
        logger.exception("unexpected failure")
        _report(ledger, run_id, args.command, e)
        return EXIT_FAILED


def main(argv: list[str] | None = None) -> int:
    """Main CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)

    if not args.command:
        parser.print_help()
        return EXIT_OK

    ledger = _open_ledger(args.ledger)
    args._ledger = ledger
    run_id = None
    if ledger is not None and args.command != "history":
        run_id = ledger.start_run(args.command, run_parameters(args), args.seed)
    args._run_id = run_id

    code = _dispatch(args, ledger, run_id)

    if run_id is not None:
        ledger.finish_run(run_id, code, getattr(args, "_manifest_path", None))
    return code


if __name__ == "__main__":
    sys.exit(main())

"""
CLI command for browsing the run ledger.
"""

import argparse

from .cli_args import console
from .errors import InvalidParamError
from .render import HistoryView


def cmd_history(args: argparse.Namespace) -> int:
    """Show recent runs and, with --errors, recent errors."""
    ledger = getattr(args, "_ledger", None)
    if ledger is None:
        raise InvalidParamError(f"run ledger {args.ledger} could not be opened")
    if args.limit < 1:
        raise InvalidParamError(f"--limit must be positive, got {args.limit}")

    HistoryView(ledger, console).show(limit=args.limit, errors=args.errors)
    return 0


def setup_runs_parser(subparsers) -> None:
    """Setup history subcommand."""
    history_parser = subparsers.add_parser(
        "history",
        help="Show recent runs from the ledger",
    )
    history_parser.add_argument(
        "--limit",
        type=int,
        default=20,
        help="Number of runs to show (default: 20)",
    )
    history_parser.add_argument(
        "--errors",
        action="store_true",
        help="Also show recent errors",
    )
    history_parser.set_defaults(func=cmd_history)

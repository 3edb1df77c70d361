"""
CLI command for the verification suites.
"""

import argparse
import logging

from .cli_args import console, p_value, q_value, write_outputs
from .render import render_suite
from .suites import SUITES, SuiteOptions, run_suite

logger = logging.getLogger(__name__)


def cmd_verify(args: argparse.Namespace) -> int:
    """Run one verification suite; exit 0 iff every check passes."""
    opts = SuiteOptions(p=args.p, q=args.q, seed=args.seed, seeds=args.seeds, workers=args.threads)
    result = run_suite(args.suite, opts)
    console.print(render_suite(result))

    ledger = getattr(args, "_ledger", None)
    run_id = getattr(args, "_run_id", None)
    if ledger is not None and run_id is not None:
        ledger.record_checks(run_id, result)

    write_outputs(args, {f"verify_{args.suite}.json": result.to_dict()})
    return 0 if result.passed else 1


def setup_verify_parser(subparsers) -> None:
    """Setup verify subcommand."""
    verify_parser = subparsers.add_parser(
        "verify",
        help="Run a numeric verification suite",
    )
    verify_parser.add_argument(
        "suite",
        choices=list(SUITES),
        help="Suite to run",
    )
    verify_parser.add_argument("--p", type=p_value, default=2.0, help="Transport exponent >= 1")
    verify_parser.add_argument(
        "--q", type=q_value, default=2.0, help="Aggregation exponent >= 1 or inf"
    )
    verify_parser.add_argument(
        "--seeds",
        type=int,
        default=20,
        help="Random instances for the randomized suites (default: 20)",
    )
    verify_parser.set_defaults(func=cmd_verify)

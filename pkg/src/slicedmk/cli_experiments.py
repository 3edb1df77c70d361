"""
CLI commands for the empirical sampling-rate experiments.
"""

import argparse
import logging

from .cli_args import console, int_list, output_dir, p_value, q_value, resolve_dirs, write_outputs
from .empirics import (
    REFERENCE_FACTOR,
    fit_log_slope,
    rate_separation_experiment,
    sampling_rate_experiment,
    write_rate_csv,
    write_separation_csv,
)
from .render import render_rates, render_separation
from .sphere import format_q

logger = logging.getLogger(__name__)


def cmd_rates(args: argparse.Namespace) -> int:
    """Mean sliced distance of empirical measures of the square, per sample size."""
    dirs = resolve_dirs(args.dirs or ("circle:64" if args.n == 2 else "mc:256"), args.n, args.seed)
    records = sampling_rate_experiment(
        args.p, args.q, args.Ns, args.trials, dirs, args.seed,
        reference_factor=args.reference_factor, track_direction=args.track_direction,
        workers=args.threads,
    )

    fits = {}
    if len(args.Ns) >= 2:
        for statistic in dict.fromkeys(r.statistic_id for r in records):
            rows = [r for r in records if r.statistic_id == statistic]
            fits[statistic] = fit_log_slope([r.N for r in rows], [r.mean for r in rows])
    console.print(render_rates(records, fits))

    out = output_dir(args)
    write_rate_csv(records, out / "rates.csv")
    summary = {
        "p": args.p,
        "q": format_q(args.q),
        "dirs": dirs.identifier,
        "fits": {
            name: {"slope": fit.slope, "intercept": fit.intercept, "stderr": fit.stderr}
            for name, fit in fits.items()
        },
        "all_within_bound": all(r.passed is not False for r in records),
    }
    write_outputs(args, {"rates.json": summary}, [out / "rates.csv"])
    return 0


def cmd_separation(args: argparse.Namespace) -> int:
    """Classical versus sliced rates between two independent samples."""
    dirs = resolve_dirs(args.dirs or ("circle:64" if args.n == 2 else "mc:256"), args.n, args.seed)
    table = rate_separation_experiment(
        args.p, args.q, args.Ns, args.trials, dirs, args.seed,
        sampler=args.sampler, workers=args.threads,
    )
    console.print(render_separation(table))

    out = output_dir(args)
    write_separation_csv(table, out / "separation.csv")
    summary = {
        "p": args.p,
        "q": format_q(args.q),
        "dirs": dirs.identifier,
        "classical_slope": table.classical_fit.slope,
        "sliced_slope": table.sliced_fit.slope,
        "slope_gap": table.slope_gap,
        "ratio_increasing": table.ratio_increasing,
    }
    write_outputs(args, {"separation.json": summary}, [out / "separation.csv"])
    return 0


def _add_common_arguments(parser: argparse.ArgumentParser, default_ns: str) -> None:
    parser.add_argument("--p", type=p_value, default=2.0, help="Transport exponent >= 1")
    parser.add_argument("--q", type=q_value, default=2.0, help="Aggregation exponent >= 1 or inf")
    parser.add_argument(
        "--Ns",
        type=int_list,
        default=int_list(default_ns),
        help=f"Comma-separated sample sizes (default: {default_ns})",
    )
    parser.add_argument("--trials", type=int, default=50, help="Draws per sample size")
    parser.add_argument("--n", type=int, default=2, help="Ambient dimension (default: 2)")
    parser.add_argument(
        "--dirs",
        default=None,
        help="Direction set (default: circle:64 for n=2, else mc:256)",
    )


def setup_experiments_parser(subparsers) -> None:
    """Setup rates and separation subcommands."""
    rates_parser = subparsers.add_parser(
        "rates",
        help="Sampling rate of the sliced distance for the uniform square",
    )
    _add_common_arguments(rates_parser, "64,128,256")
    rates_parser.add_argument(
        "--track-direction",
        type=int,
        default=None,
        metavar="K",
        help="Also record the single-direction cost along direction index K",
    )
    rates_parser.add_argument(
        "--reference-factor",
        type=int,
        default=REFERENCE_FACTOR,
        metavar="F",
        help=f"Reference sample size as a multiple of the largest N (default: {REFERENCE_FACTOR})",
    )
    rates_parser.set_defaults(func=cmd_rates)

    separation_parser = subparsers.add_parser(
        "separation",
        help="Classical versus sliced sampling rates (numerical evidence only)",
    )
    _add_common_arguments(separation_parser, "64,256,1024")
    separation_parser.add_argument(
        "--sampler",
        choices=["cube", "square"],
        default="cube",
        help="Sampling law: uniform cube [0,1]^n or planar square (default: cube)",
    )
    separation_parser.set_defaults(func=cmd_separation)

"""
CLI commands for distances, comparison constants and duality certificates.
"""

import argparse
import logging

from rich.panel import Panel
from rich.table import Table

from .cli_args import (
    console,
    load_measure,
    p_value,
    q_value,
    resolve_dirs,
    write_outputs,
)
from .duality import build_certificate, verify_certificate
from .errors import InvalidParamError
from .render import render_distance
from .smk import sliced_distance
from .sphere import format_q, m_constant

logger = logging.getLogger(__name__)


def cmd_distance(args: argparse.Namespace) -> int:
    """Compute MK_{p,q} between two measure files."""
    mu = load_measure(args.mu)
    nu = load_measure(args.nu)
    dirs = resolve_dirs(args.dirs, mu.dim, args.seed)

    report = sliced_distance(mu, nu, args.p, args.q, dirs, args.threads, refine=args.refine)
    console.print(render_distance(report))

    write_outputs(args, {"distance.json": report.to_dict()})
    return 0


def cmd_constant(args: argparse.Namespace) -> int:
    """Comparison constant m(q) of the unit sphere on a direction set."""
    if args.n < 2:
        raise InvalidParamError(f"--n must be at least 2, got {args.n}")
    dirs = resolve_dirs(args.dirs, args.n, args.seed)
    value = m_constant(args.q, dirs)
    console.print(f"[cyan]m({format_q(args.q)})[/] on {dirs.identifier} = [bold green]{value:.10g}")

    write_outputs(args, {
        "constant.json": {
            "q": format_q(args.q),
            "n": args.n,
            "dirset_id": dirs.identifier,
            "m": value,
        }
    })
    return 0


def cmd_certificate(args: argparse.Namespace) -> int:
    """Build a dual certificate and recheck it from scratch."""
    mu = load_measure(args.mu)
    nu = load_measure(args.nu)
    dirs = resolve_dirs(args.dirs, mu.dim, args.seed)

    cert = build_certificate(mu, nu, args.p, args.q, dirs, args.threads)
    check = verify_certificate(cert, mu, nu, dirs)
    passed = check.admissible and check.norm_ok

    table = Table(show_header=False, box=None, padding=(0, 1))
    table.add_column("Metric", style="cyan")
    table.add_column("Value", justify="right")
    table.add_row("primal MK^p", f"{cert.primal_value:.12g}")
    table.add_row("dual value", f"{check.dual_value:.12g}")
    table.add_row("gap", f"{cert.gap:.3g}")
    table.add_row("worst violation", f"{check.worst_violation:.3g}")
    table.add_row("admissible", "[green]✓[/]" if check.admissible else "[red]✗[/]")
    table.add_row("||zeta|| <= 1", "[green]✓[/]" if check.norm_ok else "[red]✗[/]")
    console.print(Panel(table, title="[bold]Dual certificate", border_style="blue"))

    write_outputs(
        args,
        {
            "certificate.json": cert.to_dict(),
            "certificate_check.json": {
                "admissible": check.admissible,
                "norm_ok": check.norm_ok,
                "dual_value": check.dual_value,
                "primal_value": cert.primal_value,
                "gap": cert.gap,
                "worst_violation": check.worst_violation,
                "dirset_id": dirs.identifier,
            },
        },
    )
    return 0 if passed else 1


def _add_pair_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("mu", help="First measure (JSON with points and weights)")
    parser.add_argument("nu", help="Second measure (JSON with points and weights)")
    parser.add_argument("--p", type=p_value, default=2.0, help="Transport exponent >= 1")
    parser.add_argument("--q", type=q_value, default=2.0, help="Aggregation exponent >= 1 or inf")
    parser.add_argument(
        "--dirs",
        default=None,
        help="Direction set: circle:M, mc:M[:seed] or a JSON file (default: circle:720 in R^2)",
    )


def setup_distance_parser(subparsers) -> None:
    """Setup distance, constant and certificate subcommands."""
    distance_parser = subparsers.add_parser(
        "distance",
        help="Sliced distance MK_{p,q} between two measures",
    )
    _add_pair_arguments(distance_parser)
    distance_parser.add_argument(
        "--refine",
        action="store_true",
        help="For q=inf in R^2, polish the maximizing angle",
    )
    distance_parser.set_defaults(func=cmd_distance)

    constant_parser = subparsers.add_parser(
        "constant",
        help="Comparison constant m(q) = (int |omega_1|^q dsigma)^(1/q)",
    )
    constant_parser.add_argument("--q", type=q_value, default=2.0, help="Exponent >= 1 or inf")
    constant_parser.add_argument("--n", type=int, default=2, help="Ambient dimension")
    constant_parser.add_argument(
        "--dirs",
        default=None,
        help="Direction set (default: circle:720 for n=2, else mc:2048 seeded by --seed)",
    )
    constant_parser.set_defaults(func=cmd_constant)

    certificate_parser = subparsers.add_parser(
        "certificate",
        help="Build and verify a dual certificate for MK_{p,q}^p",
    )
    _add_pair_arguments(certificate_parser)
    certificate_parser.set_defaults(func=cmd_certificate)

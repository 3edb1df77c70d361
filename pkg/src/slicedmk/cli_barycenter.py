"""
CLI command for sliced barycenters.
"""

import argparse
import logging

from .barycenter import BarycenterProblem, BarycenterSolver, grid_oracle, objective, write_trace_csv
from .cli_args import console, output_dir, write_outputs
from .render import render_barycenter

logger = logging.getLogger(__name__)


def cmd_barycenter(args: argparse.Namespace) -> int:
    """Solve a barycenter problem file; optionally compare against the grid oracle."""
    problem = BarycenterProblem.load(args.problem, default_seed=args.seed)
    solver = BarycenterSolver(problem, seed=args.seed, batch_size=args.batch_size)
    result = solver.solve(args.iters)
    console.print(render_barycenter(result))

    payload = result.to_dict()
    if args.oracle:
        oracle = grid_oracle(problem, resolution=args.resolution)
        oracle_value = objective(problem, oracle, args.threads)
        payload["oracle"] = {
            "support": oracle.points.tolist(),
            "objective": oracle_value,
            "excess": result.objective - oracle_value,
        }
        console.print(
            f"[cyan]grid oracle[/] objective {oracle_value:.8g}, "
            f"solver excess {result.objective - oracle_value:.3g}"
        )

    out = output_dir(args)
    write_trace_csv(result.trace, out / "trace.csv")
    write_outputs(args, {"barycenter.json": payload}, [out / "trace.csv"])
    return 0


def setup_barycenter_parser(subparsers) -> None:
    """Setup barycenter subcommand."""
    barycenter_parser = subparsers.add_parser(
        "barycenter",
        help="Minimize sum_k lambda_k MK_{p,q}(mu_k, nu)^kappa over S-atom supports",
    )
    barycenter_parser.add_argument("problem", help="Problem JSON (inputs, p, q, kappa, S, dirs)")
    barycenter_parser.add_argument(
        "--iters",
        type=int,
        default=2000,
        help="Iteration budget (default: 2000)",
    )
    barycenter_parser.add_argument(
        "--batch-size",
        type=int,
        default=None,
        help="Directions sampled per iteration (default: all)",
    )
    barycenter_parser.add_argument(
        "--oracle",
        action="store_true",
        help="Also run the Dirac grid oracle (S = 1, dim <= 3)",
    )
    barycenter_parser.add_argument(
        "--resolution",
        type=float,
        default=1e-3,
        help="Grid oracle cell size (default: 1e-3)",
    )
    barycenter_parser.set_defaults(func=cmd_barycenter)

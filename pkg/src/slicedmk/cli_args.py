"""Argument types, configuration defaults and output helpers shared by the cli_* modules."""

import argparse
import logging
import os
from pathlib import Path
from typing import Any

from rich.console import Console

from .errors import InvalidExponentError
from .manifest import RunManifest, write_payload
from .measures import DiscreteMeasure
from .sphere import DirectionSet, parse_direction_spec, parse_q

logger = logging.getLogger(__name__)

console = Console()
err_console = Console(stderr=True)

DEFAULT_SEED = 42
DEFAULT_LEDGER = "slicedmk_runs.db"


def env_int(name: str, default: int | None) -> int | None:
    """Integer from the environment, falling back to default when unset or malformed."""
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning("ignoring %s=%r: not an integer", name, raw)
        return default


def default_seed() -> int:
    return env_int("SLICEDMK_SEED", DEFAULT_SEED)


def default_threads() -> int:
    return env_int("SLICEDMK_THREADS", os.cpu_count() or 1)


def default_ledger() -> str:
    return os.environ.get("SLICEDMK_LEDGER", DEFAULT_LEDGER)


def p_value(text: str) -> float:
    """argparse type for the transport exponent: a real >= 1."""
    try:
        p = float(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"p must be a real number >= 1, got {text!r}") from e
    if not p >= 1 or p == float("inf"):
        raise argparse.ArgumentTypeError(f"p must be a finite real >= 1, got {text!r}")
    return p


def q_value(text: str) -> float:
    """argparse type for the aggregation exponent: a real >= 1 or 'inf'."""
    try:
        return parse_q(text)
    except InvalidExponentError as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def int_list(text: str) -> list[int]:
    """argparse type for comma-separated positive integers such as 64,128,256."""
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from e
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError(f"expected positive integers, got {text!r}")
    return values


def load_measure(path: str) -> DiscreteMeasure:
    logger.debug("loading measure from %s", path)
    return DiscreteMeasure.load(path)


def resolve_dirs(spec: str | None, dim: int, seed: int) -> DirectionSet:
    """Parse a direction spec; None means circle:720 in R^2 and mc:2048 elsewhere."""
    if spec is None:
        spec = (
            f"circle:{DirectionSet.DEFAULT_CIRCLE_COUNT}"
            if dim == 2
            else f"mc:{DirectionSet.DEFAULT_MC_COUNT}"
        )
    dirs = parse_direction_spec(spec, dim, seed)
    logger.info("using %d directions (%s)", len(dirs), dirs.identifier)
    return dirs


def output_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def run_parameters(args: argparse.Namespace) -> dict[str, Any]:
    """Parsed arguments minus handler plumbing, for manifests and the ledger."""
    skip = {"func", "verbose", "ledger", "out_dir", "threads"}
    params = {}
    for key, value in sorted(vars(args).items()):
        if key in skip or key.startswith("_"):
            continue
        params[key] = "inf" if value == float("inf") else value
    return params


def write_outputs(
    args: argparse.Namespace, payloads: dict[str, Any], extra_paths: list[Path] | None = None
) -> Path:
    """Write JSON payloads and the manifest; remember the manifest path for the ledger.

    Args:
        args: Parsed arguments of the command
        payloads: File name -> JSON-serializable payload
        extra_paths: Already-written artifacts (CSV files) to hash as well

    Returns:
        Path of manifest.json
    """
    out = output_dir(args)
    paths = [write_payload(out / name, data) for name, data in payloads.items()]
    paths.extend(extra_paths or [])
    manifest = RunManifest.build(args.command, run_parameters(args), {"seed": args.seed}, paths)
    path = manifest.write(out)
    args._manifest_path = str(path)
    return path

"""Fixed-support barycenters for the sliced (p,q)-Monge-Kantorovich distance.

The objective is B(nu) = sum_k lambda_k MK_{p,q}(mu_k, nu)^kappa over measures
nu with S equally weighted atoms. For kappa >= 1 it is minimized by projected
subgradient descent on the atom locations; for 0 < kappa < 1 by a coordinate
pattern search.
"""

import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, NamedTuple

import numpy as np

from .duality import zeta_from_values
from .errors import (
    DegenerateInputError,
    DimMismatchError,
    EmptyMeasureError,
    HypothesisViolatedError,
    InvalidParamError,
    InvalidWeightsError,
    StepTooLargeError,
    UnsupportedOracleError,
)
from .measures import DiscreteMeasure
from .ot1d import check_exponent, quantile_cost_gradient
from .smk import sliced_distance
from .sphere import DirectionSet, format_q, lq_aggregate, parse_direction_spec, parse_q

logger = logging.getLogger(__name__)


class BarycenterProblem:
    """Weighted input measures plus the exponents and direction set of the objective."""

    def __init__(
        self,
        measures: list[DiscreteMeasure],
        lambdas: Any,
        p: float,
        q: float,
        kappa: float,
        support_size: int,
        dirs: DirectionSet,
    ):
        """Validate a barycenter problem.

        Raises:
            EmptyMeasureError: If there are no input measures
            InvalidWeightsError: If lambdas are not positive or do not sum to 1
            HypothesisViolatedError: If p > q
            InvalidParamError: If kappa < 0 or support_size < 1
            DimMismatchError: If inputs and directions disagree on dimension
        """
        if not measures:
            raise EmptyMeasureError("a barycenter needs at least one input measure")
        lam = np.asarray(lambdas, dtype=float).reshape(-1)
        if lam.shape[0] != len(measures) or np.any(lam <= 0) or not np.all(np.isfinite(lam)):
            raise InvalidWeightsError("need one positive lambda per input measure")
        if abs(float(lam.sum()) - 1.0) > 1e-9:
            raise InvalidWeightsError(f"lambdas sum to {float(lam.sum())!r}, not 1")
        self.p = check_exponent(p)
        self.q = parse_q(q)
        if self.p > self.q:
            raise HypothesisViolatedError(f"barycenters need p <= q, got p={p}, q={q}")
        if kappa < 0:
            raise InvalidParamError(f"kappa must be >= 0, got {kappa}")
        if support_size < 1:
            raise InvalidParamError(f"support size must be >= 1, got {support_size}")
        dims = {m.dim for m in measures}
        if len(dims) != 1 or dirs.dim not in dims:
            raise DimMismatchError(f"input dims {sorted(dims)}, direction dim {dirs.dim}")

        self.measures = list(measures)
        self.lambdas = lam / lam.sum()
        self.kappa = float(kappa)
        self.support_size = int(support_size)
        self.dirs = dirs

    @property
    def dim(self) -> int:
        return self.dirs.dim

    @property
    def r(self) -> float:
        return math.inf if math.isinf(self.q) else self.q / self.p

    @property
    def diameter(self) -> float:
        """Diagonal of the bounding box of every input atom (1.0 if that is a point)."""
        points = np.vstack([m.points for m in self.measures])
        span = float(np.linalg.norm(points.max(axis=0) - points.min(axis=0)))
        return span if span > 0 else 1.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "inputs": [
                {"measure": m.to_dict(), "weight": float(lam)}
                for m, lam in zip(self.measures, self.lambdas, strict=True)
            ],
            "p": self.p,
            "q": format_q(self.q),
            "kappa": self.kappa,
            "support_size": self.support_size,
            "dirs": self.dirs.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any], default_seed: int = 42) -> "BarycenterProblem":
        """Rebuild a problem; "dirs" may be a spec string such as "circle:720" or a set."""
        try:
            measures = [DiscreteMeasure.from_dict(item["measure"]) for item in data["inputs"]]
            lambdas = [item["weight"] for item in data["inputs"]]
            dirs_data = data.get("dirs", f"circle:{DirectionSet.DEFAULT_CIRCLE_COUNT}")
            if isinstance(dirs_data, str):
                dirs = parse_direction_spec(dirs_data, measures[0].dim, default_seed)
            else:
                dirs = DirectionSet.from_dict(dirs_data)
            return cls(measures, lambdas, data["p"], data["q"], data.get("kappa", 1.0),
                       data["support_size"], dirs)
        except (KeyError, TypeError, IndexError) as e:
            raise InvalidParamError(f"malformed barycenter problem JSON: {e}") from e

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True, indent=2))

    @classmethod
    def load(cls, path: str | Path, default_seed: int = 42) -> "BarycenterProblem":
        return cls.from_dict(json.loads(Path(path).read_text()), default_seed)


def objective(problem: BarycenterProblem, nu: DiscreteMeasure, workers: int | None = None) -> float:
    """B(nu) = sum_k lambda_k MK_{p,q}(mu_k, nu)^kappa on the problem's direction set."""
    if nu.dim != problem.dim:
        raise DimMismatchError(f"candidate has dim {nu.dim}, problem has {problem.dim}")
    if problem.kappa == 0:
        return 1.0
    terms = [
        lam * sliced_distance(m, nu, problem.p, problem.q, problem.dirs, workers).aggregate
        ** problem.kappa
        for m, lam in zip(problem.measures, problem.lambdas, strict=True)
    ]
    return math.fsum(terms)


class TraceRow(NamedTuple):
    iteration: int
    objective: float
    step: float


class BarycenterResult(NamedTuple):
    """Best support found plus the full objective trace."""

    measure: DiscreteMeasure
    objective: float
    trace: list[TraceRow]
    converged: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "support": self.measure.points.tolist(),
            "weights": self.measure.weights.tolist(),
            "objective": self.objective,
            "iterations": len(self.trace),
            "converged": self.converged,
        }


class BarycenterSolver:
    """Minimize the barycenter objective over S equally weighted atoms."""

    MAX_INCREASES = 10
    PLATEAU_WINDOW = 200
    PLATEAU_TOLERANCE = 1e-4
    INCREASE_SLACK = 1e-12
    JITTER = 0.05

    def __init__(
        self,
        problem: BarycenterProblem,
        seed: int = 42,
        batch_size: int | None = None,
        step_scale: float | None = None,
    ):
        """Set up the solver.

        Args:
            problem: The barycenter problem
            seed: Seed for the initial support and direction batches
            batch_size: Directions per iteration; all of them when None
            step_scale: Initial step; half the problem diameter when None
        """
        if batch_size is not None and batch_size < 1:
            raise InvalidParamError(f"batch size must be positive, got {batch_size}")
        self.problem = problem
        self.rng = np.random.default_rng(seed)
        self.batch_size = batch_size
        self.step_scale = step_scale if step_scale is not None else 0.5 * problem.diameter

    def initial_support(self) -> np.ndarray:
        """Atoms drawn from the lambda-mixture of the inputs, plus a small Gaussian jitter."""
        problem = self.problem
        pool = np.vstack([m.points for m in problem.measures])
        mass = np.concatenate([lam * m.weights for m, lam in zip(problem.measures,
                                                                   problem.lambdas, strict=True)])
        picks = self.rng.choice(pool.shape[0], size=problem.support_size, p=mass / mass.sum())
        jitter = self.JITTER * problem.diameter
        return pool[picks] + jitter * self.rng.standard_normal((problem.support_size, problem.dim))

    def _batch(self) -> tuple[np.ndarray, np.ndarray]:
        dirs = self.problem.dirs
        if self.batch_size is None or self.batch_size >= len(dirs):
            return dirs.directions, dirs.weights
        index = self.rng.choice(len(dirs), size=self.batch_size, replace=False)
        w = dirs.weights[index]
        return dirs.directions[index], w / w.sum()

    def value_and_gradient(
        self, support: np.ndarray, directions: np.ndarray, weights: np.ndarray
    ) -> tuple[float, np.ndarray]:
        """Objective on the given directions and its gradient in the atom locations.

        The gradient is scaled by S (the inverse atom weight) so that step sizes
        do not depend on the support size.
        """
        problem = self.problem
        p, kappa, r = problem.p, problem.kappa, problem.r
        size = support.shape[0]

        proj = directions @ support.T
        order = np.argsort(proj, axis=1, kind="stable")
        xb = np.take_along_axis(proj, order, axis=1)
        cb = np.cumsum(np.full(proj.shape, 1.0 / size), axis=1)
        cb[:, -1] = 1.0

        total = []
        grad = np.zeros_like(support)
        for m, lam in zip(problem.measures, problem.lambdas, strict=True):
            pa = directions @ m.points.T
            order_a = np.argsort(pa, axis=1, kind="stable")
            xa = np.take_along_axis(pa, order_a, axis=1)
            ca = np.cumsum(m.weights[order_a], axis=1)
            ca[:, -1] = 1.0

            costs, g_sorted = quantile_cost_gradient(xa, ca, xb, cb, p)
            costs = np.maximum(costs, 0.0)
            mk_power = lq_aggregate(costs, weights, r)
            total.append(lam * mk_power ** (kappa / p))
            if mk_power <= 0:
                continue
            try:
                zeta = zeta_from_values(costs, weights, r)
            except DegenerateInputError:
                continue

            g = np.empty_like(g_sorted)
            np.put_along_axis(g, order, g_sorted, axis=1)
            scale = lam * (kappa / p) * mk_power ** (kappa / p - 1.0)
            coef = scale * weights * zeta
            grad += (coef[:, None] * g).T @ directions
        return math.fsum(total), grad * size

    def _plateaued(self, values: list[float]) -> bool:
        if len(values) <= self.PLATEAU_WINDOW:
            return False
        old = values[-1 - self.PLATEAU_WINDOW]
        return abs(old - values[-1]) <= self.PLATEAU_TOLERANCE * abs(old) + 1e-14

    def solve(self, iters: int, init: np.ndarray | None = None) -> BarycenterResult:
        """Run the solver for at most iters iterations.

        Returns:
            BarycenterResult with the best iterate seen

        Raises:
            StepTooLargeError: If the objective rises 10 iterations in a row
        """
        problem = self.problem
        support = self.initial_support() if init is None else np.array(init, dtype=float)
        if support.shape != (problem.support_size, problem.dim):
            raise DimMismatchError(
                f"initial support has shape {support.shape}, "
                f"expected {(problem.support_size, problem.dim)}"
            )
        if problem.kappa == 0:
            return BarycenterResult(DiscreteMeasure(support), 1.0, [], True)
        if problem.kappa < 1:
            return self._pattern_search(support, iters)

        trace: list[TraceRow] = []
        values: list[float] = []
        best_value, best_support = math.inf, support.copy()
        increases = 0
        converged = False
        for t in range(iters):
            directions, weights = self._batch()
            value, grad = self.value_and_gradient(support, directions, weights)
            step = self.step_scale / math.sqrt(1.0 + t)
            trace.append(TraceRow(t, value, step))

            if values and value > values[-1] + self.INCREASE_SLACK * max(1.0, abs(values[-1])):
                increases += 1
            else:
                increases = 0
            values.append(value)
            if increases >= self.MAX_INCREASES:
                raise StepTooLargeError(
                    f"objective increased {increases} times in a row at iteration {t}"
                )
            if value < best_value:
                best_value, best_support = value, support.copy()
            if self._plateaued(values):
                converged = True
                logger.info("plateau reached at iteration %d", t)
                break
            support = support - step * grad

        measure = DiscreteMeasure(best_support)
        if self.batch_size is not None or not trace:
            best_value = objective(problem, measure)
        return BarycenterResult(measure, best_value, trace, converged)

    def _pattern_search(self, support: np.ndarray, iters: int) -> BarycenterResult:
        """Coordinate search with halving steps, for 0 < kappa < 1."""
        problem = self.problem
        step = 0.25 * problem.diameter
        value = objective(problem, DiscreteMeasure(support))
        trace = [TraceRow(0, value, step)]
        converged = False
        for t in range(1, iters):
            improved = False
            for j in range(support.shape[0]):
                for axis in range(problem.dim):
                    for sign in (1.0, -1.0):
                        trial = support.copy()
                        trial[j, axis] += sign * step
                        trial_value = objective(problem, DiscreteMeasure(trial))
                        if trial_value < value:
                            support, value, improved = trial, trial_value, True
            if not improved:
                step *= 0.5
            trace.append(TraceRow(t, value, step))
            if step < 1e-9 * problem.diameter:
                converged = True
                break
        return BarycenterResult(DiscreteMeasure(support), value, trace, converged)


def solve_fixed_support(
    problem: BarycenterProblem,
    iters: int,
    seed: int = 42,
    batch_size: int | None = None,
    init: np.ndarray | None = None,
    step_scale: float | None = None,
) -> tuple[DiscreteMeasure, list[TraceRow]]:
    """Convenience wrapper around BarycenterSolver returning (measure, trace)."""
    result = BarycenterSolver(problem, seed, batch_size, step_scale).solve(iters, init)
    return result.measure, result.trace


def _dirac_objective(problem: BarycenterProblem, candidates: np.ndarray) -> np.ndarray:
    """B(delta_y) for each row y of candidates, in closed form."""
    directions, weights = problem.dirs.directions, problem.dirs.weights
    p, r, kappa = problem.p, problem.r, problem.kappa
    total = np.zeros(candidates.shape[0])
    yp = candidates @ directions.T
    for m, lam in zip(problem.measures, problem.lambdas, strict=True):
        xp = m.points @ directions.T
        costs = np.einsum("i,gim->gm", m.weights, np.abs(xp[None, :, :] - yp[:, None, :]) ** p)
        if math.isinf(r):
            mk_power = costs.max(axis=1)
        else:
            mk_power = (costs**r @ weights) ** (1.0 / r)
        total += lam * mk_power ** (kappa / p)
    return total


def grid_oracle(
    problem: BarycenterProblem,
    bounds: tuple[Any, Any] | None = None,
    resolution: float = 1e-3,
    points_per_axis: int = 21,
) -> DiscreteMeasure:
    """Exhaustive minimizer over Dirac candidates, refined by zooming.

    Each round evaluates a full grid, then shrinks the box to two cells around
    the best point until cells are below resolution. For kappa >= 1 the
    objective is convex in the location, so the zoom tracks the global minimum.

    Raises:
        UnsupportedOracleError: Unless support_size is 1 and the dimension is at most 3
    """
    if problem.support_size != 1:
        raise UnsupportedOracleError("the grid oracle only handles single-atom supports")
    if problem.dim > 3:
        raise UnsupportedOracleError(f"the grid oracle handles dim <= 3, got {problem.dim}")
    if bounds is None:
        points = np.vstack([m.points for m in problem.measures])
        lo0, hi0 = points.min(axis=0), points.max(axis=0)
    else:
        lo0 = np.asarray(bounds[0], dtype=float)
        hi0 = np.asarray(bounds[1], dtype=float)
    lo, hi = lo0.copy(), hi0.copy()

    atoms = sum(m.size for m in problem.measures)
    budget = max(1, (1 << 22) // max(1, atoms * len(problem.dirs)))
    while True:
        axes = [np.linspace(lo[d], hi[d], points_per_axis) for d in range(problem.dim)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, problem.dim)
        values = np.concatenate([
            _dirac_objective(problem, grid[start:start + budget])
            for start in range(0, grid.shape[0], budget)
        ])
        best = grid[int(np.argmin(values))]
        cell = (hi - lo) / (points_per_axis - 1)
        if float(cell.max()) <= resolution:
            break
        lo = np.maximum(best - 2.0 * cell, lo0)
        hi = np.minimum(best + 2.0 * cell, hi0)
    logger.debug("grid oracle minimum %.6g at %s", float(values.min()), best)
    return DiscreteMeasure.dirac(best)


def write_trace_csv(trace: list[TraceRow], path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["iteration", "objective", "step"])
        for row in trace:
            writer.writerow([row.iteration, repr(row.objective), repr(row.step)])

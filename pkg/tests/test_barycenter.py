"""Tests for sliced barycenters and the grid oracle."""

import csv
import json

import numpy as np
import pytest

from slicedmk.barycenter import (
    BarycenterProblem,
    BarycenterSolver,
    grid_oracle,
    objective,
    solve_fixed_support,
    write_trace_csv,
)
from slicedmk.errors import (
    DimMismatchError,
    EmptyMeasureError,
    HypothesisViolatedError,
    InvalidParamError,
    InvalidWeightsError,
    StepTooLargeError,
    UnsupportedOracleError,
)
from slicedmk.counterexamples import nongeodesic_pair
from slicedmk.measures import DiscreteMeasure, project
from slicedmk.ot1d import displacement_interpolate_1d, wasserstein_1d
from slicedmk.sphere import circle_grid, mc_directions


@pytest.fixture
def two_deltas():
    """delta_0 and delta_{2 e1} with equal weights; the minimizer is delta_{e1}."""
    return BarycenterProblem(
        [DiscreteMeasure.dirac([0.0, 0.0]), DiscreteMeasure.dirac([2.0, 0.0])],
        [0.5, 0.5], p=2.0, q=2.0, kappa=2.0, support_size=1, dirs=circle_grid(64),
    )


@pytest.fixture
def spread_problem():
    a = DiscreteMeasure([[0.0, 0.0], [1.0, 0.5], [0.5, 1.0]])
    b = DiscreteMeasure([[2.0, 1.0], [2.5, 0.0]], [0.3, 0.7])
    c = DiscreteMeasure([[0.5, 2.0], [1.5, 2.5], [1.0, 1.5]], [0.2, 0.5, 0.3])
    return BarycenterProblem([a, b, c], [0.5, 0.3, 0.2], p=2.0, q=4.0, kappa=2.0,
                             support_size=1, dirs=circle_grid(64))


def test_two_deltas_meet_in_the_middle(two_deltas):
    result = BarycenterSolver(two_deltas, seed=42).solve(2000)
    np.testing.assert_allclose(result.measure.points, [[1.0, 0.0]], atol=1e-6)
    assert result.objective == pytest.approx(0.5, abs=1e-9)
    assert result.converged
    assert objective(two_deltas, result.measure) == pytest.approx(0.5, abs=1e-9)


def test_solver_matches_the_grid_oracle(spread_problem):
    result = BarycenterSolver(spread_problem, seed=1).solve(2000)
    oracle = grid_oracle(spread_problem)
    best = objective(spread_problem, oracle)
    assert result.objective <= best + 1e-2


def test_oracle_finds_the_midpoint(two_deltas):
    oracle = grid_oracle(two_deltas)
    np.testing.assert_allclose(oracle.points, [[1.0, 0.0]], atol=2e-3)


def test_trace_is_monotone_in_the_best_value(spread_problem):
    result = BarycenterSolver(spread_problem, seed=3).solve(300)
    assert len(result.trace) <= 300
    assert result.objective <= min(row.objective for row in result.trace) + 1e-12
    steps = [row.step for row in result.trace]
    assert all(b < a for a, b in zip(steps, steps[1:]))


def test_mini_batches_report_the_full_objective(spread_problem):
    measure, trace = solve_fixed_support(spread_problem, 50, seed=2, batch_size=16)
    assert len(trace) == 50
    result = BarycenterSolver(spread_problem, seed=2, batch_size=16).solve(50)
    np.testing.assert_array_equal(result.measure.points, measure.points)
    assert result.objective == objective(spread_problem, measure)


def test_several_atoms(spread_problem):
    problem = BarycenterProblem(spread_problem.measures, spread_problem.lambdas, 2.0, 2.0, 2.0,
                                support_size=3, dirs=circle_grid(32))
    result = BarycenterSolver(problem, seed=0).solve(500)
    assert result.measure.size == 3
    start = objective(problem, DiscreteMeasure(BarycenterSolver(problem, seed=0)
                                               .initial_support()))
    assert result.objective <= start + 1e-9


def test_runaway_steps_raise(two_deltas):
    solver = BarycenterSolver(two_deltas, step_scale=100.0)
    with pytest.raises(StepTooLargeError):
        solver.solve(100, init=[[5.0, 5.0]])


def test_kappa_zero_keeps_the_initial_support():
    problem = BarycenterProblem([DiscreteMeasure.dirac([1.0, 1.0])], [1.0], 2.0, 2.0, 0.0, 1,
                                circle_grid(8))
    result = BarycenterSolver(problem).solve(10, init=[[3.0, 4.0]])
    np.testing.assert_array_equal(result.measure.points, [[3.0, 4.0]])
    assert result.objective == 1.0


def test_small_kappa_uses_pattern_search(two_deltas):
    problem = BarycenterProblem(two_deltas.measures, two_deltas.lambdas, 2.0, 2.0, 0.5, 1,
                                circle_grid(16))
    init = np.array([[0.7, 0.9]])
    result = BarycenterSolver(problem).solve(200, init=init)
    assert result.objective <= objective(problem, DiscreteMeasure(init))
    assert result.trace[0].step > result.trace[-1].step


def test_initial_support_shape_is_checked(two_deltas):
    with pytest.raises(DimMismatchError):
        BarycenterSolver(two_deltas).solve(5, init=[[0.0, 0.0, 0.0]])
    with pytest.raises(InvalidParamError):
        BarycenterSolver(two_deltas, batch_size=0)


def test_problem_validation():
    m = DiscreteMeasure.dirac([0.0, 0.0])
    dirs = circle_grid(8)
    with pytest.raises(EmptyMeasureError):
        BarycenterProblem([], [], 2.0, 2.0, 1.0, 1, dirs)
    with pytest.raises(InvalidWeightsError):
        BarycenterProblem([m, m], [0.5, 0.6], 2.0, 2.0, 1.0, 1, dirs)
    with pytest.raises(HypothesisViolatedError):
        BarycenterProblem([m], [1.0], 3.0, 2.0, 1.0, 1, dirs)
    with pytest.raises(InvalidParamError):
        BarycenterProblem([m], [1.0], 2.0, 2.0, -1.0, 1, dirs)
    with pytest.raises(InvalidParamError):
        BarycenterProblem([m], [1.0], 2.0, 2.0, 1.0, 0, dirs)
    with pytest.raises(DimMismatchError):
        BarycenterProblem([m], [1.0], 2.0, 2.0, 1.0, 1, mc_directions(3, 8, seed=1))


def test_problem_file_accepts_a_direction_spec(tmp_path, two_deltas):
    data = two_deltas.to_dict()
    data["dirs"] = "circle:32"
    data["q"] = "inf"
    path = tmp_path / "problem.json"
    path.write_text(json.dumps(data))
    loaded = BarycenterProblem.load(path)
    assert loaded.dirs.identifier == "circle:32"
    assert loaded.r == float("inf")

    two_deltas.save(path)
    again = BarycenterProblem.load(path)
    assert again.dirs.identifier == "circle:64"
    assert again.lambdas.tolist() == [0.5, 0.5]
    with pytest.raises(InvalidParamError):
        BarycenterProblem.from_dict({"inputs": []})


def test_oracle_limits(two_deltas):
    wide = BarycenterProblem(two_deltas.measures, two_deltas.lambdas, 2.0, 2.0, 2.0, 2,
                             two_deltas.dirs)
    with pytest.raises(UnsupportedOracleError):
        grid_oracle(wide)
    m = DiscreteMeasure.dirac(np.zeros(4))
    deep = BarycenterProblem([m], [1.0], 2.0, 2.0, 2.0, 1, mc_directions(4, 8, seed=1))
    with pytest.raises(UnsupportedOracleError):
        grid_oracle(deep)


def test_trace_csv(tmp_path, two_deltas):
    result = BarycenterSolver(two_deltas).solve(5)
    path = tmp_path / "trace.csv"
    write_trace_csv(result.trace, path)
    with open(path) as f:
        rows = list(csv.DictReader(f))
    assert [int(row["iteration"]) for row in rows] == list(range(len(result.trace)))
    assert float(rows[0]["objective"]) == result.trace[0].objective


def test_zero_iterations_report_the_initial_objective(two_deltas):
    init = [[0.3, 0.4]]
    result = BarycenterSolver(two_deltas).solve(0, init=init)
    assert result.trace == []
    assert result.objective == pytest.approx(objective(two_deltas, DiscreteMeasure(init)))
    assert "Infinity" not in json.dumps(result.to_dict())


def test_a_single_input_is_its_own_barycenter():
    points = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    problem = BarycenterProblem([DiscreteMeasure(points)], [1.0], p=2.0, q=2.0, kappa=2.0,
                                support_size=3, dirs=circle_grid(64))
    start = points + np.array([0.2, -0.1])
    assert objective(problem, DiscreteMeasure(start)) > 1e-2
    result = BarycenterSolver(problem).solve(300, init=start)
    assert result.objective <= 1e-3
    np.testing.assert_allclose(result.measure.points, points, atol=1e-2)


def test_uneven_weights_pull_toward_the_heavier_input():
    problem = BarycenterProblem(
        [DiscreteMeasure.dirac([0.0, 0.0]), DiscreteMeasure.dirac([2.0, 0.0])],
        [0.75, 0.25], p=2.0, q=2.0, kappa=2.0, support_size=1, dirs=circle_grid(64),
    )
    np.testing.assert_allclose(grid_oracle(problem).points, [[0.5, 0.0]], atol=2e-3)
    result = BarycenterSolver(problem).solve(300, init=[[0.3, 0.4]])
    np.testing.assert_allclose(result.measure.points, [[0.5, 0.0]], atol=1e-6)


def test_translating_the_inputs_translates_the_solution(spread_problem):
    shift = np.array([0.3, -1.2])
    moved = BarycenterProblem(
        [DiscreteMeasure(m.points + shift, m.weights) for m in spread_problem.measures],
        spread_problem.lambdas, p=2.0, q=4.0, kappa=2.0, support_size=1,
        dirs=spread_problem.dirs,
    )
    init = np.array([[1.0, 1.0]])
    base = BarycenterSolver(spread_problem, seed=5).solve(50, init=init)
    shifted = BarycenterSolver(moved, seed=5).solve(50, init=init + shift)
    np.testing.assert_allclose(shifted.measure.points, base.measure.points + shift, atol=1e-6)
    assert shifted.objective == pytest.approx(base.objective, rel=1e-9, abs=1e-12)


def test_objective_ignores_atom_order(spread_problem):
    points = np.array([[0.5, 0.5], [1.5, 1.0], [1.0, 2.0]])
    nu = DiscreteMeasure(points, [0.2, 0.3, 0.5])
    swapped = DiscreteMeasure(points[[2, 0, 1]], [0.5, 0.2, 0.3])
    assert objective(spread_problem, nu) == pytest.approx(objective(spread_problem, swapped),
                                                          abs=1e-12)


def test_barycenter_of_the_counterexample_pair_is_not_the_axis_midpoint():
    mu0, mu1 = nongeodesic_pair(2)
    problem = BarycenterProblem([mu0, mu1], [0.5, 0.5], p=2.0, q=2.0, kappa=2.0,
                                support_size=4, dirs=circle_grid(64))
    result = BarycenterSolver(problem, seed=42).solve(2000)
    e1 = [1.0, 0.0]
    midpoint = displacement_interpolate_1d(project(mu0, e1), project(mu1, e1), 0.5)
    assert wasserstein_1d(project(result.measure, e1), midpoint, 2.0) > 0.05

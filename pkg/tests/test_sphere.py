"""Tests for direction sets, aggregation and the comparison constant."""

import math

import numpy as np
import pytest

from slicedmk.errors import (
    EmptySetError,
    InvalidDirectionError,
    InvalidExponentError,
    InvalidGridError,
    InvalidParamError,
    InvalidValueError,
    ShapeMismatchError,
)
from slicedmk.sphere import (
    DirectionSet,
    circle_grid,
    format_q,
    lq_aggregate,
    lq_standard_error,
    m_constant,
    mc_directions,
    parse_direction_spec,
    parse_q,
)


def test_parse_q():
    assert parse_q("inf") == math.inf
    assert parse_q(" Infinity ") == math.inf
    assert parse_q("2.5") == 2.5
    assert parse_q(3) == 3.0
    for bad in ("0.5", "abc", float("nan")):
        with pytest.raises(InvalidExponentError):
            parse_q(bad)
    assert format_q(math.inf) == "inf"
    assert format_q(2.0) == 2.0


def test_circle_grid_has_exact_axes_and_diagonals():
    grid = circle_grid(16)
    assert len(grid) == 16
    assert grid.deterministic
    assert grid.identifier == "circle:16"
    np.testing.assert_array_equal(grid.directions[0], [1.0, 0.0])
    np.testing.assert_array_equal(grid.directions[4], [0.0, 1.0])
    assert grid.directions[2, 0] == grid.directions[2, 1] == math.sqrt(0.5)
    np.testing.assert_allclose(grid.weights, 1 / 16)


@pytest.mark.parametrize("M", [0, 4, 12, 100])
def test_circle_grid_rejects_bad_sizes(M):
    with pytest.raises(InvalidGridError):
        circle_grid(M)


def test_mc_directions_are_seeded_unit_vectors():
    a = mc_directions(3, 100, seed=5)
    b = mc_directions(3, 100, seed=5)
    np.testing.assert_array_equal(a.directions, b.directions)
    np.testing.assert_allclose(np.linalg.norm(a.directions, axis=1), 1.0)
    assert not a.deterministic
    assert a.identifier == "mc:100:5"
    with pytest.raises(EmptySetError):
        mc_directions(3, 0, seed=1)
    with pytest.raises(InvalidParamError):
        mc_directions(1, 10, seed=1)


def test_direction_set_validation():
    with pytest.raises(EmptySetError):
        DirectionSet(np.zeros((0, 2)))
    with pytest.raises(InvalidDirectionError):
        DirectionSet([[1.0, 1.0]])
    with pytest.raises(ShapeMismatchError):
        DirectionSet([[1.0, 0.0]], [0.5, 0.5])
    with pytest.raises(InvalidParamError):
        DirectionSet([[1.0, 0.0], [0.0, 1.0]], [1.5, -0.5])


def test_subset_renormalizes():
    grid = circle_grid(8)
    sub = grid.subset(np.array([0, 2]))
    assert len(sub) == 2
    np.testing.assert_allclose(sub.weights, [0.5, 0.5])


def test_direction_set_save_and_load(tmp_path):
    dirs = mc_directions(3, 10, seed=9)
    path = tmp_path / "dirs.json"
    dirs.save(path)
    loaded = DirectionSet.load(path)
    np.testing.assert_array_equal(loaded.directions, dirs.directions)
    assert loaded.identifier == dirs.identifier


def test_lq_aggregate():
    w = np.array([0.25, 0.75])
    assert lq_aggregate([2.0, 0.0], w, 1) == pytest.approx(0.5)
    assert lq_aggregate([2.0, 0.0], w, 2) == pytest.approx(1.0)
    assert lq_aggregate([2.0, 0.0], w, "inf") == 2.0
    with pytest.raises(InvalidValueError):
        lq_aggregate([-1.0, 0.0], w, 2)
    with pytest.raises(InvalidValueError):
        lq_aggregate([], [], 2)


def test_lq_aggregate_is_monotone_in_q(rng):
    values = rng.uniform(0, 3, 50)
    weights = np.full(50, 1 / 50)
    aggregates = [lq_aggregate(values, weights, q) for q in (1, 1.5, 2, 4, 8, math.inf)]
    assert all(b >= a - 1e-12 for a, b in zip(aggregates, aggregates[1:]))


def test_standard_error_vanishes_where_it_should():
    w = np.full(4, 0.25)
    assert lq_standard_error([1.0, 2.0, 3.0, 4.0], w, math.inf) == 0.0
    assert lq_standard_error([1.0, 1.0, 1.0, 1.0], w, 2) == 0.0
    assert lq_standard_error([1.0, 2.0, 3.0, 4.0], w, 2) > 0.0


def test_m_constant_on_the_circle(grid720):
    assert m_constant(2, grid720) == pytest.approx(2**-0.5, abs=1e-6)
    assert m_constant(1, grid720) == pytest.approx(2 / math.pi, abs=1e-5)
    assert m_constant(math.inf, grid720) == 1.0
    assert abs(m_constant(1000, grid720) - 1.0) <= 0.01


@pytest.mark.parametrize("n", [3, 4])
def test_m_constant_monte_carlo(n):
    dirs = mc_directions(n, 20_000, seed=42 + n)
    se = lq_standard_error(np.abs(dirs.directions[:, 0]), dirs.weights, 2)
    assert abs(m_constant(2, dirs) - n**-0.5) <= 3 * se


def test_m_constant_decreases_with_dimension():
    values = [m_constant(2, mc_directions(n, 4000, seed=1)) for n in (2, 4, 8)]
    assert values[0] > values[1] > values[2]


def test_parse_direction_spec(tmp_path):
    assert parse_direction_spec("circle:64", 2, 0).identifier == "circle:64"
    assert parse_direction_spec("mc:32", 3, 7).identifier == "mc:32:7"
    assert parse_direction_spec("mc:32:11", 3, 7).identifier == "mc:32:11"
    with pytest.raises(InvalidParamError):
        parse_direction_spec("circle:64", 3, 0)
    with pytest.raises(InvalidParamError):
        parse_direction_spec("mc:many", 3, 0)
    with pytest.raises(InvalidParamError):
        parse_direction_spec(str(tmp_path / "missing.json"), 2, 0)

    path = tmp_path / "dirs.json"
    circle_grid(8).save(path)
    assert len(parse_direction_spec(str(path), 2, 0)) == 8

"""Tests for discrete measures and their projections."""

import numpy as np
import pytest

from slicedmk.errors import (
    DimMismatchError,
    EmptyMeasureError,
    InvalidDirectionError,
    InvalidExponentError,
    InvalidParamError,
    InvalidWeightsError,
)
from slicedmk.measures import (
    DiscreteMeasure,
    Measure1D,
    check_unit,
    mix,
    project,
    pth_moment,
    sample_cube,
    sample_square,
)


def test_uniform_weights_by_default():
    m = DiscreteMeasure([[0.0, 0.0], [1.0, 1.0], [2.0, 0.0], [3.0, 1.0]])
    assert m.size == 4
    assert m.dim == 2
    np.testing.assert_allclose(m.weights, 0.25)


def test_measure_is_immutable():
    m = DiscreteMeasure([[0.0, 0.0], [1.0, 1.0]])
    with pytest.raises(ValueError):
        m.points[0, 0] = 5.0
    with pytest.raises(ValueError):
        m.weights[0] = 1.0


def test_empty_measure_rejected():
    with pytest.raises(EmptyMeasureError):
        DiscreteMeasure(np.zeros((0, 2)))


@pytest.mark.parametrize(
    "weights",
    [[0.5, 0.6], [-0.1, 1.1], [np.nan, 1.0], [1.0]],
)
def test_invalid_weights_rejected(weights):
    with pytest.raises(InvalidWeightsError):
        DiscreteMeasure([[0.0, 0.0], [1.0, 0.0]], weights)


def test_float_drift_in_weights_is_normalized():
    m = DiscreteMeasure([[0.0], [1.0], [2.0]], [0.1, 0.2, 0.7 + 1e-12])
    assert abs(m.weights.sum() - 1.0) < 1e-15


def test_non_finite_points_rejected():
    with pytest.raises(InvalidParamError):
        DiscreteMeasure([[0.0, np.inf]])


def test_dirac_and_translate():
    m = DiscreteMeasure.dirac([1.0, 2.0])
    assert m.size == 1
    shifted = m.translate([1.0, -2.0])
    np.testing.assert_allclose(shifted.points, [[2.0, 0.0]])
    with pytest.raises(DimMismatchError):
        m.translate([1.0, 2.0, 3.0])


def test_save_and_load(tmp_path):
    m = DiscreteMeasure([[0.0, 1.0], [2.0, 3.0]], [0.25, 0.75])
    path = tmp_path / "m.json"
    m.save(path)
    loaded = DiscreteMeasure.load(path)
    np.testing.assert_array_equal(loaded.points, m.points)
    np.testing.assert_array_equal(loaded.weights, m.weights)


def test_from_dict_rejects_wrong_dim():
    with pytest.raises(InvalidParamError):
        DiscreteMeasure.from_dict({"dim": 3, "points": [[0.0, 1.0]], "weights": [1.0]})
    with pytest.raises(InvalidParamError):
        DiscreteMeasure.from_dict({"points": [[0.0, 1.0]]})


def test_measure1d_sorts_and_merges_ties():
    m = Measure1D([2.0, 0.0, 2.0 + 1e-14, 1.0], [0.1, 0.2, 0.3, 0.4])
    np.testing.assert_allclose(m.atoms, [0.0, 1.0, 2.0])
    np.testing.assert_allclose(m.weights, [0.2, 0.4, 0.4])
    assert m.cumulative[-1] == 1.0


def test_check_unit():
    with pytest.raises(InvalidDirectionError):
        check_unit([1.0, 1.0], 2)
    with pytest.raises(DimMismatchError):
        check_unit([1.0, 0.0, 0.0], 2)
    np.testing.assert_array_equal(check_unit([0.0, 1.0], 2), [0.0, 1.0])


def test_project_onto_axis():
    m = DiscreteMeasure([[3.0, 1.0], [-1.0, 5.0], [3.0, 7.0]])
    p = project(m, [1.0, 0.0])
    np.testing.assert_allclose(p.atoms, [-1.0, 3.0])
    np.testing.assert_allclose(p.weights, [1 / 3, 2 / 3])


def test_samplers_are_seeded_and_supported():
    a = sample_square(100, 3, 7)
    b = sample_square(100, 3, 7)
    np.testing.assert_array_equal(a.points, b.points)
    assert np.all(np.abs(a.points[:, :2]) <= 1.0)
    assert np.all(a.points[:, 2] == 0.0)

    c = sample_cube(50, 2, 1)
    assert np.all((c.points >= 0.0) & (c.points <= 1.0))
    with pytest.raises(EmptyMeasureError):
        sample_cube(0, 2, 1)
    with pytest.raises(InvalidParamError):
        sample_square(10, 1, 1)


def test_pth_moment():
    m = DiscreteMeasure([[3.0, 4.0], [0.0, 0.0]])
    assert pth_moment(m, 2.0) == pytest.approx(12.5)
    assert pth_moment(Measure1D([-2.0, 2.0]), 1.0) == pytest.approx(2.0)
    with pytest.raises(InvalidExponentError):
        pth_moment(m, 0.5)


def test_mix_endpoints_and_weights():
    m0 = DiscreteMeasure.dirac([0.0, 0.0])
    m1 = DiscreteMeasure.dirac([1.0, 0.0])
    assert mix(m0, m1, 0.0) is m0
    assert mix(m0, m1, 1.0) is m1
    mid = mix(m0, m1, 0.25)
    np.testing.assert_allclose(mid.weights, [0.75, 0.25])
    with pytest.raises(InvalidParamError):
        mix(m0, m1, 1.5)

"""Tests for the verification suites."""

import json

import pytest

from slicedmk.errors import InvalidParamError
from slicedmk.suites import SUITES, SuiteOptions, random_measure, run_suite


@pytest.fixture
def quick():
    return SuiteOptions(seeds=3)


@pytest.mark.parametrize("name", ["metric", "nongeodesic", "linear-geodesic", "duality", "remark"])
def test_fast_suites_pass(name, quick):
    result = run_suite(name, quick)
    assert result.name == name
    assert result.rows
    assert result.passed, [row for row in result.rows if not row.passed]


def test_comparison_suite(quick):
    result = run_suite("comparison", quick)
    assert result.passed, [row for row in result.rows if not row.passed]
    assert len(result.rows) == 4


@pytest.mark.slow
def test_density_suite():
    result = run_suite("density", SuiteOptions())
    assert result.passed, [row for row in result.rows if not row.passed]


def test_nongeodesic_suite_for_q_infinity():
    result = run_suite("nongeodesic", SuiteOptions(p=2.0, q=float("inf")))
    contradiction = [row for row in result.rows if row.check == "midpoint contradiction"]
    assert len(contradiction) == 1
    assert not contradiction[0].passed
    assert not result.passed


def test_unknown_suite():
    with pytest.raises(InvalidParamError):
        run_suite("bogus", SuiteOptions())


def test_suites_need_at_least_one_seed():
    with pytest.raises(InvalidParamError):
        run_suite("duality", SuiteOptions(seeds=0))


def test_suite_names():
    assert set(SUITES) == {
        "metric", "comparison", "nongeodesic", "linear-geodesic", "duality", "remark", "density",
    }


def test_result_serializes(quick):
    data = run_suite("remark", quick).to_dict()
    assert data["suite"] == "remark"
    assert data["q"] == 2
    assert data["passed"] is True
    assert len(data["checks"]) == 4
    json.dumps(data)


def test_random_measure_shape(rng):
    for _ in range(20):
        m = random_measure(rng, max_atoms=4, dim=3)
        assert 1 <= m.size <= 4
        assert m.dim == 3

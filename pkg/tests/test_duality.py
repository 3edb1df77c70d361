"""Tests for dual certificates of the sliced distance."""

import math

import numpy as np
import pytest

from slicedmk.duality import (
    DualCertificate,
    build_certificate,
    holder_conjugate,
    verify_certificate,
    weighted_norm,
    zeta_from_values,
)
from slicedmk.errors import (
    DegenerateInputError,
    HypothesisViolatedError,
    InvalidParamError,
    ShapeMismatchError,
)
from slicedmk.measures import DiscreteMeasure, project
from slicedmk.ot1d import GridFunction
from slicedmk.sphere import circle_grid, lq_aggregate
from slicedmk.suites import random_measure


def test_holder_conjugate():
    assert holder_conjugate(1) == math.inf
    assert holder_conjugate(math.inf) == 1.0
    assert holder_conjugate(2) == 2.0
    assert holder_conjugate(3) == pytest.approx(1.5)


def test_zeta_is_ones_for_r_one():
    np.testing.assert_array_equal(zeta_from_values([0.0, 2.0], [0.5, 0.5], 1), [1.0, 1.0])


@pytest.mark.parametrize("r", [1.5, 2.0, 4.0, math.inf])
def test_zeta_attains_the_norm(r, rng):
    values = rng.uniform(0.1, 2.0, 40)
    weights = np.full(40, 1 / 40)
    zeta = zeta_from_values(values, weights, r)
    assert np.all(zeta > 0)
    assert weighted_norm(zeta, weights, holder_conjugate(r)) <= 1.0 + 1e-12
    pairing = float(np.sum(weights * zeta * values))
    assert pairing == pytest.approx(lq_aggregate(values, weights, r), rel=1e-9)


def test_zeta_with_some_zero_costs_stays_in_the_ball():
    weights = np.full(4, 0.25)
    zeta = zeta_from_values([0.0, 1.0, 0.0, 3.0], weights, 2.0)
    assert np.all(zeta >= 1e-12)
    assert weighted_norm(zeta, weights, 2.0) <= 1.0 + 1e-12


def test_zeta_errors():
    with pytest.raises(DegenerateInputError):
        zeta_from_values([0.0, 0.0], [0.5, 0.5], 2.0)
    with pytest.raises(InvalidParamError):
        zeta_from_values([1.0], [1.0], 0.5)


@pytest.mark.parametrize("p,q", [(2.0, 2.0), (1.0, 2.0), (2.0, 4.0), (2.0, math.inf)])
def test_certificates_close_the_gap(p, q, rng, grid64):
    for _ in range(5):
        mu, nu = random_measure(rng, 8), random_measure(rng, 8)
        cert = build_certificate(mu, nu, p, q, grid64)
        assert -1e-9 <= cert.gap <= 1e-5
        check = verify_certificate(cert, mu, nu, grid64)
        assert check.admissible
        assert check.norm_ok
        assert check.dual_value == cert.dual_value


def test_primal_matches_the_sliced_distance(pair_2d, grid64):
    from slicedmk.smk import sliced_distance

    mu, nu = pair_2d
    cert = build_certificate(mu, nu, 2.0, 4.0, grid64)
    distance = sliced_distance(mu, nu, 2.0, 4.0, grid64).aggregate
    assert cert.primal_value == pytest.approx(distance**2, rel=1e-9)
    assert cert.r == 2.0
    assert cert.r_prime == 2.0


def test_identical_measures_use_constant_zeta(pair_2d, grid64):
    mu, _ = pair_2d
    cert = build_certificate(mu, mu, 2.0, 4.0, grid64)
    np.testing.assert_array_equal(cert.zeta, np.ones(len(grid64)))
    assert cert.primal_value == 0.0
    assert abs(cert.dual_value) <= 1e-12


def test_p_above_q_is_rejected(pair_2d, grid64):
    mu, nu = pair_2d
    with pytest.raises(HypothesisViolatedError):
        build_certificate(mu, nu, 3.0, 2.0, grid64)


def test_certificate_survives_a_file(pair_2d, grid64, tmp_path):
    mu, nu = pair_2d
    cert = build_certificate(mu, nu, 1.0, math.inf, grid64)
    path = tmp_path / "cert.json"
    cert.save(path)
    loaded = DualCertificate.load(path)
    assert loaded.q == math.inf
    assert loaded.dirset_id == "circle:64"
    check = verify_certificate(loaded, mu, nu, grid64)
    assert check.admissible and check.norm_ok
    assert check.dual_value == pytest.approx(cert.dual_value, rel=1e-12)


def test_certificate_for_other_directions_is_rejected(pair_2d, grid64):
    mu, nu = pair_2d
    cert = build_certificate(mu, nu, 2.0, 2.0, grid64)
    with pytest.raises(ShapeMismatchError):
        verify_certificate(cert, mu, nu, circle_grid(32))


def test_tampered_potentials_fail_admissibility(pair_2d, grid64):
    mu, nu = pair_2d
    cert = build_certificate(mu, nu, 2.0, 2.0, grid64)
    phi, psi = cert.potentials[0]
    tampered = [(phi.shifted(-1.0), psi)] + list(cert.potentials[1:])
    bad = cert._replace(potentials=tampered)
    assert not verify_certificate(bad, mu, nu, grid64).admissible


def test_certificate_needs_matching_measures(grid64):
    mu = DiscreteMeasure.dirac([0.0, 0.0])
    nu = DiscreteMeasure.dirac([1.0, 0.0])
    cert = build_certificate(mu, nu, 2.0, 2.0, grid64)
    far = DiscreteMeasure.dirac([5.0, 5.0])
    with pytest.raises(ShapeMismatchError):
        verify_certificate(cert, far, nu, grid64)


def test_inflated_zeta_fails_the_norm_bound(pair_2d, grid64):
    mu, nu = pair_2d
    cert = build_certificate(mu, nu, 2.0, 4.0, grid64)
    check = verify_certificate(cert._replace(zeta=cert.zeta * 1.1), mu, nu, grid64)
    assert not check.norm_ok
    assert check.admissible


def test_raising_a_potential_lowers_the_dual_value(pair_2d, grid64):
    mu, nu = pair_2d
    cert = build_certificate(mu, nu, 2.0, 4.0, grid64)
    k, delta = 0, 0.25
    line = project(mu, grid64.directions[k])
    phi, psi = cert.potentials[k]
    values = phi.values.copy()
    values[np.argmin(np.abs(phi.grid - line.atoms[0]))] += delta
    raised = [(GridFunction(phi.grid, values), psi)] + list(cert.potentials[1:])

    before = verify_certificate(cert, mu, nu, grid64)
    after = verify_certificate(cert._replace(potentials=raised), mu, nu, grid64)
    assert after.admissible
    drop = grid64.weights[k] * cert.zeta[k] * delta * line.weights[0]
    assert before.dual_value - after.dual_value == pytest.approx(drop, abs=1e-12)


def test_dual_value_for_two_diracs():
    grid = circle_grid(720)
    mu = DiscreteMeasure.dirac([0.0, 0.0])
    nu = DiscreteMeasure.dirac([1.0, 0.0])
    cert = build_certificate(mu, nu, 2.0, 2.0, grid)
    check = verify_certificate(cert, mu, nu, grid)
    assert check.admissible and check.norm_ok
    assert check.dual_value == pytest.approx(0.5, abs=1e-6)

"""Shared fixtures for the slicedmk tests."""

import numpy as np
import pytest

from slicedmk.measures import DiscreteMeasure
from slicedmk.sphere import circle_grid


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def grid64():
    return circle_grid(64)


@pytest.fixture
def grid720():
    return circle_grid(720)


@pytest.fixture
def pair_2d():
    """Two small planar measures with distinct supports and uneven weights."""
    mu = DiscreteMeasure([[0.0, 0.0], [1.0, 0.5], [-0.5, 2.0]], [0.2, 0.5, 0.3])
    nu = DiscreteMeasure([[1.0, 1.0], [2.0, -1.0]], [0.6, 0.4])
    return mu, nu


@pytest.fixture
def ledger_path(tmp_path):
    """Path for a throwaway run ledger."""
    return tmp_path / "runs.db"

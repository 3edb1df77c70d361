"""Discrete probability measures on R^n and their one-dimensional projections."""

import json
import logging
from pathlib import Path
from typing import Any

import numpy as np

from .errors import (
    DimMismatchError,
    EmptyMeasureError,
    InvalidDirectionError,
    InvalidExponentError,
    InvalidParamError,
    InvalidWeightsError,
)

logger = logging.getLogger(__name__)

WEIGHT_SUM_TOLERANCE = 1e-9
UNIT_TOLERANCE = 1e-9
MERGE_TOLERANCE = 1e-12


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def _normalized_weights(weights: Any, size: int) -> np.ndarray:
    """Validate weights and rescale away benign float drift.

    Args:
        weights: Candidate weights (any array-like)
        size: Expected number of weights

    Returns:
        Weights summing to one

    Raises:
        InvalidWeightsError: If weights are negative, non-finite or far from summing to one
    """
    w = np.asarray(weights, dtype=float).reshape(-1)
    if w.shape[0] != size:
        raise InvalidWeightsError(f"expected {size} weights, got {w.shape[0]}")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise InvalidWeightsError("weights must be finite and non-negative")
    total = float(np.sum(w))
    if abs(total - 1.0) > WEIGHT_SUM_TOLERANCE:
        raise InvalidWeightsError(f"weights sum to {total!r}, not 1")
    return w / total


class DiscreteMeasure:
    """Finitely supported probability measure on R^n, immutable after construction."""

    __slots__ = ("_points", "_weights")

    def __init__(self, points: Any, weights: Any = None):
        """Build a measure from atom locations and weights.

        Args:
            points: Array-like of shape (N, n)
            weights: Array-like of N non-negative weights; uniform when omitted

        Raises:
            EmptyMeasureError: If there are no points
            InvalidParamError: If points are not a finite (N, n) array
            InvalidWeightsError: If weights are invalid
        """
        pts = np.array(points, dtype=float)
        if pts.ndim == 1 and pts.size > 0:
            pts = pts.reshape(1, -1)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise EmptyMeasureError("a measure needs at least one point")
        if pts.shape[1] == 0:
            raise InvalidParamError("points must have at least one coordinate")
        if not np.all(np.isfinite(pts)):
            raise InvalidParamError("point coordinates must be finite")

        size = pts.shape[0]
        if weights is None:
            w = np.full(size, 1.0 / size)
        else:
            w = _normalized_weights(weights, size)

        self._points = _frozen(pts)
        self._weights = _frozen(w)

    @classmethod
    def dirac(cls, x: Any) -> "DiscreteMeasure":
        """Unit point mass at x."""
        return cls(np.asarray(x, dtype=float).reshape(1, -1), [1.0])

    @property
    def dim(self) -> int:
        return int(self._points.shape[1])

    @property
    def points(self) -> np.ndarray:
        return self._points

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def size(self) -> int:
        return int(self._points.shape[0])

    def translate(self, v: Any) -> "DiscreteMeasure":
        """Push the measure forward under x -> x + v."""
        shift = np.asarray(v, dtype=float).reshape(-1)
        if shift.shape[0] != self.dim:
            raise DimMismatchError(f"shift has dim {shift.shape[0]}, measure has {self.dim}")
        return DiscreteMeasure(self._points + shift, self._weights)

    def to_dict(self) -> dict[str, Any]:
        return {
            "dim": self.dim,
            "points": self._points.tolist(),
            "weights": self._weights.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "DiscreteMeasure":
        """Rebuild a measure from its JSON form.

        Raises:
            InvalidParamError: If required keys are missing or dim disagrees with points
        """
        try:
            points = data["points"]
            weights = data["weights"]
            dim = int(data["dim"])
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidParamError(f"malformed measure JSON: {e}") from e
        measure = cls(points, weights)
        if measure.dim != dim:
            raise InvalidParamError(f"declared dim {dim} but points have dim {measure.dim}")
        return measure

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True))

    @classmethod
    def load(cls, path: str | Path) -> "DiscreteMeasure":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def __repr__(self) -> str:
        return f"DiscreteMeasure(dim={self.dim}, size={self.size})"


class Measure1D:
    """Sorted atoms with merged ties, weights and cumulative weights on R."""

    __slots__ = ("_atoms", "_weights", "_cumulative")

    def __init__(self, atoms: Any, weights: Any = None, merge_tol: float = MERGE_TOLERANCE):
        """Sort atoms and merge those closer than merge_tol.

        Args:
            atoms: Atom locations in any order
            weights: Matching weights; uniform when omitted
            merge_tol: Absolute distance below which neighbouring atoms are merged
        """
        values = np.asarray(atoms, dtype=float).reshape(-1)
        if values.size == 0:
            raise EmptyMeasureError("a measure needs at least one atom")
        if not np.all(np.isfinite(values)):
            raise InvalidParamError("atoms must be finite")
        if weights is None:
            w = np.full(values.size, 1.0 / values.size)
        else:
            w = _normalized_weights(weights, values.size)

        order = np.argsort(values, kind="stable")
        values = values[order]
        w = w[order]

        # Chain-merge: a new group starts where the gap exceeds the tolerance
        starts = np.concatenate(([True], np.diff(values) > merge_tol))
        group = np.cumsum(starts) - 1
        merged_atoms = values[starts]
        merged_weights = np.bincount(group, weights=w)

        cumulative = np.cumsum(merged_weights)
        cumulative[-1] = 1.0

        self._atoms = _frozen(merged_atoms)
        self._weights = _frozen(merged_weights)
        self._cumulative = _frozen(cumulative)

    @classmethod
    def dirac(cls, a: float) -> "Measure1D":
        return cls([a], [1.0])

    @property
    def atoms(self) -> np.ndarray:
        return self._atoms

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def cumulative(self) -> np.ndarray:
        return self._cumulative

    @property
    def size(self) -> int:
        return int(self._atoms.shape[0])

    def as_measure(self) -> DiscreteMeasure:
        """View as a measure on R^1."""
        return DiscreteMeasure(self._atoms.reshape(-1, 1), self._weights)

    def __repr__(self) -> str:
        return f"Measure1D(size={self.size})"


def check_unit(w: Any, dim: int) -> np.ndarray:
    """Validate a projection direction.

    Args:
        w: Candidate direction
        dim: Ambient dimension it must match

    Returns:
        The direction as a float array

    Raises:
        DimMismatchError: If the direction has the wrong length
        InvalidDirectionError: If |w| differs from 1 by more than 1e-9
    """
    direction = np.asarray(w, dtype=float).reshape(-1)
    if direction.shape[0] != dim:
        raise DimMismatchError(f"direction has dim {direction.shape[0]}, measure has {dim}")
    norm = float(np.linalg.norm(direction))
    if not np.isfinite(norm) or abs(norm - 1.0) > UNIT_TOLERANCE:
        raise InvalidDirectionError(f"direction norm is {norm!r}, expected 1")
    return direction


def project(m: DiscreteMeasure, w: Any) -> Measure1D:
    """Push m forward under x -> <x, w>."""
    direction = check_unit(w, m.dim)
    return Measure1D(m.points @ direction, m.weights)


def _check_sample_size(N: int) -> None:
    if N < 1:
        raise EmptyMeasureError(f"sample size must be positive, got {N}")


def sample_square(N: int, dim: int, seed: int | np.random.SeedSequence) -> DiscreteMeasure:
    """Draw N i.i.d. points from the uniform law on [-1, 1]^2 x {0}^(dim-2).

    Args:
        N: Number of points
        dim: Ambient dimension, at least 2
        seed: Seed or seed sequence for numpy's default generator

    Returns:
        Equal-weight empirical measure
    """
    _check_sample_size(N)
    if dim < 2:
        raise InvalidParamError(f"the square sampler needs dim >= 2, got {dim}")
    rng = np.random.default_rng(seed)
    points = np.zeros((N, dim))
    points[:, :2] = rng.uniform(-1.0, 1.0, size=(N, 2))
    return DiscreteMeasure(points)


def sample_cube(N: int, dim: int, seed: int | np.random.SeedSequence) -> DiscreteMeasure:
    """Draw N i.i.d. points from the uniform law on [0, 1]^dim."""
    _check_sample_size(N)
    if dim < 1:
        raise InvalidParamError(f"dim must be positive, got {dim}")
    rng = np.random.default_rng(seed)
    return DiscreteMeasure(rng.uniform(0.0, 1.0, size=(N, dim)))


def pth_moment(m: DiscreteMeasure | Measure1D, p: float) -> float:
    """Return sum_i w_i |x_i|^p, which equals MK_p(delta_0, m)^p."""
    if p < 1:
        raise InvalidExponentError(f"p must be >= 1, got {p}")
    if isinstance(m, Measure1D):
        radii = np.abs(m.atoms)
    else:
        radii = np.linalg.norm(m.points, axis=1)
    return float(np.dot(m.weights, radii**p))


def mix(m0: DiscreteMeasure, m1: DiscreteMeasure, tau: float) -> DiscreteMeasure:
    """Linear interpolation (1 - tau) m0 + tau m1.

    Raises:
        InvalidParamError: If tau is outside [0, 1]
        DimMismatchError: If the measures live in different dimensions
    """
    if not 0.0 <= tau <= 1.0:
        raise InvalidParamError(f"tau must lie in [0, 1], got {tau}")
    if m0.dim != m1.dim:
        raise DimMismatchError(f"cannot mix dim {m0.dim} with dim {m1.dim}")
    if tau == 0.0:
        return m0
    if tau == 1.0:
        return m1
    points = np.vstack([m0.points, m1.points])
    weights = np.concatenate([(1.0 - tau) * m0.weights, tau * m1.weights])
    return DiscreteMeasure(points, weights)

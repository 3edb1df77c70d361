"""Direction sets on the unit sphere and weighted L^q aggregation over them."""

import json
import logging
import math
from pathlib import Path
from typing import Any

import numpy as np

from .errors import (
    EmptySetError,
    InvalidDirectionError,
    InvalidExponentError,
    InvalidGridError,
    InvalidParamError,
    InvalidValueError,
    ShapeMismatchError,
)
from .measures import UNIT_TOLERANCE

logger = logging.getLogger(__name__)


def parse_q(value: Any) -> float:
    """Accept a real q >= 1 or the strings "inf"/"infinity"."""
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "infinity", "oo"):
            return math.inf
        try:
            value = float(text)
        except ValueError as e:
            raise InvalidExponentError(f"q must be a real >= 1 or 'inf', got {value!r}") from e
    q = float(value)
    if math.isnan(q) or q < 1:
        raise InvalidExponentError(f"q must be >= 1, got {q}")
    return q


def format_q(q: float) -> str | float:
    """JSON-friendly q: the string "inf" for infinity, the float otherwise."""
    return "inf" if math.isinf(q) else q


class DirectionSet:
    """Finite set of unit directions in R^n with positive quadrature weights."""

    DEFAULT_MC_COUNT = 2048
    DEFAULT_CIRCLE_COUNT = 720

    __slots__ = ("_directions", "_weights", "_kind", "_seed")

    def __init__(self, directions: Any, weights: Any = None, kind: str = "explicit", seed=None):
        """Validate directions and normalize weights.

        Args:
            directions: Array-like (M, n) of unit vectors
            weights: Positive weights summing to 1 (1e-9 slack); uniform when omitted
            kind: "circle", "mc" or "explicit"
            seed: Seed used to draw Monte Carlo directions, if any

        Raises:
            EmptySetError: If there are no directions
            InvalidDirectionError: If a direction is not unit length
            InvalidParamError: If the weights are invalid
        """
        dirs = np.array(directions, dtype=float)
        if dirs.ndim != 2 or dirs.shape[0] == 0:
            raise EmptySetError("a direction set needs at least one direction")
        norms = np.linalg.norm(dirs, axis=1)
        if np.any(np.abs(norms - 1.0) > UNIT_TOLERANCE):
            raise InvalidDirectionError("every direction must have unit norm")

        if weights is None:
            w = np.full(dirs.shape[0], 1.0 / dirs.shape[0])
        else:
            w = np.array(weights, dtype=float).reshape(-1)
            if w.shape[0] != dirs.shape[0]:
                raise ShapeMismatchError(f"{dirs.shape[0]} directions but {w.shape[0]} weights")
            if np.any(~np.isfinite(w)) or np.any(w <= 0):
                raise InvalidParamError("direction weights must be positive")
            if abs(float(w.sum()) - 1.0) > 1e-9:
                raise InvalidParamError(f"direction weights sum to {float(w.sum())!r}, not 1")
            w = w / w.sum()

        dirs.setflags(write=False)
        w.setflags(write=False)
        self._directions = dirs
        self._weights = w
        self._kind = kind
        self._seed = seed

    @property
    def directions(self) -> np.ndarray:
        return self._directions

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def dim(self) -> int:
        return int(self._directions.shape[1])

    @property
    def kind(self) -> str:
        return self._kind

    @property
    def seed(self):
        return self._seed

    @property
    def deterministic(self) -> bool:
        """False only for Monte Carlo sets, whose quadrature error is statistical."""
        return self._kind != "mc"

    @property
    def identifier(self) -> str:
        """Short id recorded in reports, e.g. circle:720 or mc:2048:42."""
        if self._kind == "mc":
            return f"mc:{len(self)}:{self._seed}"
        if self._kind == "circle":
            return f"circle:{len(self)}"
        return f"explicit:{len(self)}:{self.dim}"

    def __len__(self) -> int:
        return int(self._directions.shape[0])

    def subset(self, index: np.ndarray) -> "DirectionSet":
        """Directions at the given indices with renormalized weights."""
        w = self._weights[index]
        return DirectionSet(self._directions[index], w / w.sum(), kind="explicit")

    def to_dict(self) -> dict[str, Any]:
        data = {
            "dim": self.dim,
            "kind": self._kind,
            "directions": self._directions.tolist(),
            "weights": self._weights.tolist(),
        }
        if self._seed is not None:
            data["seed"] = self._seed
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "DirectionSet":
        try:
            dset = cls(data["directions"], data["weights"], data.get("kind", "explicit"),
                       data.get("seed"))
            dim = int(data["dim"])
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidParamError(f"malformed direction set JSON: {e}") from e
        if dset.dim != dim:
            raise InvalidParamError(f"declared dim {dim} but directions have dim {dset.dim}")
        return dset

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True))

    @classmethod
    def load(cls, path: str | Path) -> "DirectionSet":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def __repr__(self) -> str:
        return f"DirectionSet({self.identifier})"


def mc_directions(n: int, M: int, seed: int) -> DirectionSet:
    """M i.i.d. uniform directions on S^(n-1) from normalized Gaussians, equal weights."""
    if n < 2:
        raise InvalidParamError(f"directions need n >= 2, got {n}")
    if M < 1:
        raise EmptySetError(f"need at least one direction, got {M}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((M, n))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    # A zero Gaussian draw has probability zero; redraw it anyway
    while np.any(norms == 0):
        bad = norms[:, 0] == 0
        g[bad] = rng.standard_normal((int(bad.sum()), n))
        norms = np.linalg.norm(g, axis=1, keepdims=True)
    return DirectionSet(g / norms, kind="mc", seed=seed)


def circle_grid(M: int) -> DirectionSet:
    """Equally spaced directions (cos 2 pi k/M, sin 2 pi k/M) on S^1, equal weights.

    M must be a multiple of 8 so that the coordinate axes and the diagonals
    (+-e1 +- e2)/sqrt(2) are grid points; those are set exactly.
    """
    if M < 8 or M % 8 != 0:
        raise InvalidGridError(f"circle grid size must be a positive multiple of 8, got {M}")
    k = np.arange(M)
    angles = 2.0 * np.pi * k / M
    dirs = np.column_stack([np.cos(angles), np.sin(angles)])

    eighth = M // 8
    half = math.sqrt(0.5)
    exact = [(1.0, 0.0), (half, half), (0.0, 1.0), (-half, half),
             (-1.0, 0.0), (-half, -half), (0.0, -1.0), (half, -half)]
    for octant, vec in enumerate(exact):
        dirs[octant * eighth] = vec
    return DirectionSet(dirs, kind="circle")


def _check_values(values: Any, weights: Any) -> tuple[np.ndarray, np.ndarray]:
    v = np.asarray(values, dtype=float).reshape(-1)
    w = np.asarray(weights, dtype=float).reshape(-1)
    if v.shape != w.shape:
        raise InvalidValueError(f"{v.size} values but {w.size} weights")
    if v.size == 0:
        raise InvalidValueError("nothing to aggregate")
    if not np.all(np.isfinite(v)) or np.any(v < 0):
        raise InvalidValueError("aggregated values must be finite and non-negative")
    return v, w


def lq_aggregate(values: Any, weights: Any, q: float) -> float:
    """Weighted L^q norm (sum_i w_i v_i^q)^(1/q); the maximum when q is infinite."""
    q = parse_q(q)
    v, w = _check_values(values, weights)
    if math.isinf(q):
        return float(np.max(v))
    return math.fsum(w * v**q) ** (1.0 / q)


def lq_standard_error(values: Any, weights: Any, q: float) -> float:
    """Delta-method standard error of lq_aggregate under i.i.d. direction sampling.

    Meaningful for Monte Carlo direction sets only. The maximum (q infinite)
    has no central-limit error and a single value has none either; both give 0.
    """
    q = parse_q(q)
    v, w = _check_values(values, weights)
    if math.isinf(q) or v.size < 2:
        return 0.0
    powered = v**q
    integral = math.fsum(w * powered)
    if integral <= 0:
        return 0.0
    se_integral = float(np.std(powered, ddof=1)) / math.sqrt(v.size)
    return (1.0 / q) * integral ** (1.0 / q - 1.0) * se_integral


def m_constant(q: float, dirs: DirectionSet) -> float:
    """Quadrature value of (int |omega_1|^q d sigma)^(1/q); max |omega_1| for q infinite."""
    return lq_aggregate(np.abs(dirs.directions[:, 0]), dirs.weights, q)


def parse_direction_spec(spec: str, dim: int, default_seed: int) -> DirectionSet:
    """Build a direction set from "circle:M", "mc:M[:seed]" or a JSON file path.

    Raises:
        InvalidParamError: If the direction spec cannot be parsed
        InvalidGridError: If a circle grid size is not a multiple of 8
        DimMismatchError: Via callers when the resulting dim disagrees with the data
    """
    kind, _, rest = spec.partition(":")
    try:
        if kind == "circle":
            M = int(rest) if rest else DirectionSet.DEFAULT_CIRCLE_COUNT
            if dim != 2:
                raise InvalidParamError(f"circle grids live in R^2, data has dim {dim}")
            return circle_grid(M)
        if kind == "mc":
            count, _, seed = rest.partition(":")
            M = int(count) if count else DirectionSet.DEFAULT_MC_COUNT
            return mc_directions(dim, M, int(seed) if seed else default_seed)
    except ValueError as e:
        raise InvalidParamError(f"cannot parse direction spec {spec!r}: {e}") from e
    path = Path(spec)
    if not path.exists():
        raise InvalidParamError(f"direction spec {spec!r} is neither circle:M, mc:M nor a file")
    return DirectionSet.load(path)

"""Exact one-dimensional optimal transport between discrete measures.

Every routine here works on the monotone (quantile) coupling. For discrete
measures both quantile functions are piecewise constant, so merging the two
cumulative-weight sequences gives a partition of (0, 1] on which the cost is
an exact finite sum.
"""

import logging
from typing import Any

import numpy as np
from scipy.optimize import linprog

from .errors import (
    EmptyGridError,
    InvalidExponentError,
    InvalidParamError,
    InvalidQuantileError,
    ShapeMismatchError,
    SlicedMKError,
    TooLargeError,
)
from .measures import Measure1D

logger = logging.getLogger(__name__)

LP_ORACLE_MAX_ATOMS = 12
GRID_LOOKUP_TOLERANCE = 1e-9


def check_exponent(p: float) -> float:
    """Return p as a float, rejecting p < 1 and non-finite values."""
    p = float(p)
    if not np.isfinite(p) or p < 1:
        raise InvalidExponentError(f"p must be a finite real >= 1, got {p}")
    return p


class GridFunction:
    """Real values on a strictly increasing finite grid."""

    __slots__ = ("_grid", "_values")

    def __init__(self, grid: Any, values: Any):
        """Build a grid function.

        Args:
            grid: Strictly increasing grid points
            values: Finite values, one per grid point

        Raises:
            EmptyGridError: If the grid is empty
            ShapeMismatchError: If grid and values differ in length
            InvalidParamError: If the grid is not strictly increasing or values are not finite
        """
        g = np.array(grid, dtype=float).reshape(-1)
        v = np.array(values, dtype=float).reshape(-1)
        if g.size == 0:
            raise EmptyGridError("grid functions need at least one grid point")
        if g.shape != v.shape:
            raise ShapeMismatchError(f"grid has {g.size} points but {v.size} values")
        if np.any(np.diff(g) <= 0):
            raise InvalidParamError("grid must be strictly increasing")
        if not np.all(np.isfinite(v)) or not np.all(np.isfinite(g)):
            raise InvalidParamError("grid function values must be finite")
        g.setflags(write=False)
        v.setflags(write=False)
        self._grid = g
        self._values = v

    @property
    def grid(self) -> np.ndarray:
        return self._grid

    @property
    def values(self) -> np.ndarray:
        return self._values

    def lookup(self, points: Any) -> np.ndarray:
        """Values at points that must coincide with grid points.

        Raises:
            ShapeMismatchError: If a point is not on the grid
        """
        pts = np.asarray(points, dtype=float).reshape(-1)
        idx = np.clip(np.searchsorted(self._grid, pts), 0, self._grid.size - 1)
        left = np.clip(idx - 1, 0, self._grid.size - 1)
        closer_left = np.abs(self._grid[left] - pts) < np.abs(self._grid[idx] - pts)
        idx = np.where(closer_left, left, idx)
        gap = np.abs(self._grid[idx] - pts)
        if np.any(gap > GRID_LOOKUP_TOLERANCE * (1.0 + np.abs(pts))):
            raise ShapeMismatchError("point is not on the grid of this function")
        return self._values[idx]

    def shifted(self, c: float) -> "GridFunction":
        return GridFunction(self._grid, self._values + c)

    def to_dict(self) -> dict[str, list[float]]:
        return {"grid": self._grid.tolist(), "values": self._values.tolist()}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "GridFunction":
        return cls(data["grid"], data["values"])


def _merge_breakpoints(ca: np.ndarray, cb: np.ndarray):
    """Merge two rows-of-cumulative-weights arrays.

    Args:
        ca: Array (R, N) of cumulative weights, non-decreasing along rows
        cb: Array (R, K) of cumulative weights

    Returns:
        Tuple (widths, ia, ib) of shape (R, N + K): the length of each cell of the
        merged partition of (0, 1] and the quantile indices of each side on it
    """
    n_a = ca.shape[1]
    n_b = cb.shape[1]
    breaks = np.concatenate([ca, cb], axis=1)
    order = np.argsort(breaks, axis=1, kind="stable")
    sorted_breaks = np.take_along_axis(breaks, order, axis=1)
    from_a = (order < n_a).astype(np.intp)
    from_b = 1 - from_a
    # Index on the cell ending at a breakpoint: count of that side strictly before it
    ia = np.cumsum(from_a, axis=1) - from_a
    ib = np.cumsum(from_b, axis=1) - from_b
    np.minimum(ia, n_a - 1, out=ia)
    np.minimum(ib, n_b - 1, out=ib)
    widths = np.diff(sorted_breaks, axis=1, prepend=0.0)
    return widths, ia, ib


def quantile_costs(
    xa: np.ndarray, ca: np.ndarray, xb: np.ndarray, cb: np.ndarray, p: float
) -> np.ndarray:
    """Row-wise transport cost int_0^1 |Q_a(u) - Q_b(u)|^p du.

    Args:
        xa: Atoms (R, N), sorted along rows
        ca: Cumulative weights for xa, each row ending at 1
        xb: Atoms (R, K), sorted along rows
        cb: Cumulative weights for xb
        p: Exponent >= 1

    Returns:
        Array (R,) of p-th power Wasserstein costs
    """
    widths, ia, ib = _merge_breakpoints(ca, cb)
    qa = np.take_along_axis(xa, ia, axis=1)
    qb = np.take_along_axis(xb, ib, axis=1)
    return np.sum(widths * np.abs(qa - qb) ** p, axis=1)


def quantile_cost_gradient(
    xa: np.ndarray, ca: np.ndarray, xb: np.ndarray, cb: np.ndarray, p: float
) -> tuple[np.ndarray, np.ndarray]:
    """Costs plus their derivative with respect to each sorted atom of xb.

    Returns:
        Tuple (costs (R,), gradient (R, K)) where gradient[r, j] is the partial
        derivative of the row-r cost in the location of the j-th sorted atom of xb,
        holding the monotone coupling fixed (a subgradient when p = 1)
    """
    rows, n_b = xb.shape
    widths, ia, ib = _merge_breakpoints(ca, cb)
    qa = np.take_along_axis(xa, ia, axis=1)
    qb = np.take_along_axis(xb, ib, axis=1)
    diff = qb - qa
    costs = np.sum(widths * np.abs(diff) ** p, axis=1)
    slope = widths * p * np.abs(diff) ** (p - 1.0) * np.sign(diff)
    flat_index = (ib + n_b * np.arange(rows)[:, None]).ravel()
    gradient = np.bincount(flat_index, weights=slope.ravel(), minlength=rows * n_b)
    return costs, gradient.reshape(rows, n_b)


def _row(measure: Measure1D) -> tuple[np.ndarray, np.ndarray]:
    return measure.atoms.reshape(1, -1), measure.cumulative.reshape(1, -1)


def wasserstein_1d(mu: Measure1D, nu: Measure1D, p: float) -> float:
    """Exact p-Wasserstein distance between two discrete measures on R."""
    p = check_exponent(p)
    xa, ca = _row(mu)
    xb, cb = _row(nu)
    cost = float(quantile_costs(xa, ca, xb, cb, p)[0])
    return max(cost, 0.0) ** (1.0 / p)


def solve_transport_lp(a: np.ndarray, b: np.ndarray, cost: np.ndarray) -> float:
    """Optimal value of the discrete transport linear program.

    Args:
        a: Source weights (N,)
        b: Target weights (K,)
        cost: Cost matrix (N, K)

    Returns:
        min over couplings of sum gamma_ij cost_ij
    """
    n_a, n_b = cost.shape
    rows = np.kron(np.eye(n_a), np.ones((1, n_b)))
    cols = np.kron(np.ones((1, n_a)), np.eye(n_b))
    result = linprog(
        cost.ravel(),
        A_eq=np.vstack([rows, cols]),
        b_eq=np.concatenate([a, b]),
        bounds=(0, None),
        method="highs-ds",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if result.status != 0:
        raise SlicedMKError(f"transport LP failed: {result.message}")
    logger.debug("transport LP %dx%d solved, value %.3e", n_a, n_b, result.fun)
    return float(result.fun)


def brute_force_lp_1d(mu: Measure1D, nu: Measure1D, p: float) -> float:
    """Solve the full coupling LP on R; an oracle independent of the quantile formula."""
    p = check_exponent(p)
    largest = max(mu.size, nu.size)
    if largest > LP_ORACLE_MAX_ATOMS:
        raise TooLargeError("lp_oracle_atoms", LP_ORACLE_MAX_ATOMS, largest)
    cost = np.abs(mu.atoms[:, None] - nu.atoms[None, :]) ** p
    value = solve_transport_lp(mu.weights, nu.weights, cost)
    return max(value, 0.0) ** (1.0 / p)


def quantile(mu: Measure1D, u: float) -> float:
    """Left-continuous generalized inverse of the CDF: inf{x : F(x) >= u}."""
    if not 0.0 < u < 1.0:
        raise InvalidQuantileError(f"quantile level must lie in (0, 1), got {u}")
    idx = int(np.searchsorted(mu.cumulative, u, side="left"))
    return float(mu.atoms[min(idx, mu.size - 1)])


def displacement_interpolate_1d(mu: Measure1D, nu: Measure1D, tau: float) -> Measure1D:
    """Point tau on the geodesic from mu to nu: Q_tau = (1 - tau) Q_mu + tau Q_nu."""
    if not 0.0 <= tau <= 1.0:
        raise InvalidParamError(f"tau must lie in [0, 1], got {tau}")
    if tau == 0.0:
        return mu
    if tau == 1.0:
        return nu
    xa, ca = _row(mu)
    xb, cb = _row(nu)
    widths, ia, ib = _merge_breakpoints(ca, cb)
    keep = widths[0] > 0
    atoms = (1.0 - tau) * xa[0, ia[0]] + tau * xb[0, ib[0]]
    weights = widths[0, keep]
    return Measure1D(atoms[keep], weights / weights.sum())


def ctransform(phi: GridFunction, p: float, domain: Any) -> GridFunction:
    """The |t - s|^p transform of phi, with the sup restricted to phi's grid.

    Args:
        phi: Function on a finite grid
        p: Exponent
        domain: Points s at which the transform is evaluated (any order; duplicates dropped)

    Returns:
        GridFunction on sorted domain with values max_t (-|t - s|^p - phi(t))
    """
    p = check_exponent(p)
    if isinstance(domain, GridFunction):
        domain = domain.grid
    s = np.unique(np.asarray(domain, dtype=float).reshape(-1))
    if s.size == 0:
        raise EmptyGridError("c-transform domain is empty")
    t = phi.grid
    values = np.max(-np.abs(t[None, :] - s[:, None]) ** p - phi.values[None, :], axis=1)
    return GridFunction(s, values)


def dual_value_1d(phi: GridFunction, psi: GridFunction, mu: Measure1D, nu: Measure1D) -> float:
    """Kantorovich dual objective -int phi dmu - int psi dnu."""
    source = np.dot(mu.weights, phi.lookup(mu.atoms))
    target = np.dot(nu.weights, psi.lookup(nu.atoms))
    return float(-source - target)


def optimal_potentials_1d(
    mu: Measure1D, nu: Measure1D, p: float
) -> tuple[GridFunction, GridFunction]:
    """Admissible dual potentials attaining the 1D transport cost.

    Potentials are read off the monotone plan by complementary slackness,
    then phi and psi are replaced by successive c-transforms on the joint atom
    grid, which makes -phi(t) - psi(s) <= |t - s|^p hold on the whole grid.
    The pair is normalized so phi vanishes at the smallest atom of mu.

    Args:
        mu: Source measure
        nu: Target measure
        p: Exponent >= 1

    Returns:
        Tuple (phi, psi), both on the union of the two atom sets
    """
    p = check_exponent(p)
    xa, ca = _row(mu)
    xb, cb = _row(nu)
    _, ia, ib = _merge_breakpoints(ca, cb)

    phi_a = np.full(mu.size, np.nan)
    psi_b = np.full(nu.size, np.nan)
    phi_a[0] = 0.0
    # The merged (ia, ib) sequence is a staircase through every atom of both sides
    for i, j in zip(ia[0], ib[0], strict=True):
        c = abs(mu.atoms[i] - nu.atoms[j]) ** p
        if np.isnan(psi_b[j]):
            psi_b[j] = -c - phi_a[i]
        elif np.isnan(phi_a[i]):
            phi_a[i] = -c - psi_b[j]

    joint = np.union1d(mu.atoms, nu.atoms)
    phi = ctransform(GridFunction(nu.atoms, psi_b), p, joint)
    psi = ctransform(phi, p, joint)
    gauge = float(phi.lookup(mu.atoms[:1])[0])
    return phi.shifted(-gauge), psi.shifted(gauge)

"""The non-geodesic pair, the linear-geodesic case p = 1, and the M-constant discrepancy.

The pair is mu0 = uniform on the four corners (+-1, +-1) and mu1 = uniform on
(+-b, 0), (0, +-b). Projected on omega(theta) = (cos theta, sin theta) with
theta in [0, pi/4], their p-th power transport cost has the closed form

    w_p(theta) = 1/2 [((1 - b) cos + sin)^p + |cos - (1 + b) sin|^p],

and with b = 2 - sqrt(2) the maximum over the circle is reached only at
theta = 0 and theta = pi/4 (plus symmetries).

The midpoint argument: a geodesic midpoint m of (mu0, mu1) has to project onto
the one-dimensional midpoint in every direction where that is forced. The
coordinate axes and the diagonal alone do not rule m out, since the eight
points (+-1/2, +-(1+b)/2), (+-(1+b)/2, +-1/2) are compatible with all three.
Adding omega(pi/8) removes six of them and leaves too few to carry the
e1-marginal, which settles the case 1 < q < infinity.
"""

import logging
import math
from typing import NamedTuple

import numpy as np
from scipy.optimize import bisect

from .errors import InvalidExponentError, InvalidParamError
from .measures import DiscreteMeasure, mix, project
from .ot1d import check_exponent, displacement_interpolate_1d, wasserstein_1d
from .smk import sliced_distance, wasserstein_nd_exact
from .sphere import DirectionSet, circle_grid, m_constant, parse_q

logger = logging.getLogger(__name__)

DEFAULT_B = 2.0 - math.sqrt(2.0)
THETA_TOLERANCE = 1e-12
MEMBERSHIP_TOLERANCE = 1e-9
MIN_SEPARATION = 1e-2
ROOT_TOLERANCE = 1e-12


def _check_b(b: float) -> float:
    if not 0.0 < b < 1.0:
        raise InvalidParamError(f"b must lie in (0, 1), got {b}")
    return float(b)


def _check_theta(theta: np.ndarray) -> np.ndarray:
    t = np.asarray(theta, dtype=float)
    if np.any(t < -THETA_TOLERANCE) or np.any(t > math.pi / 4 + THETA_TOLERANCE):
        raise InvalidParamError("theta must lie in [0, pi/4]")
    return np.clip(t, 0.0, math.pi / 4)


def _check_p_strict(p: float) -> float:
    p = check_exponent(p)
    if p <= 1:
        raise InvalidExponentError(f"this construction needs p > 1, got {p}")
    return p


def unit(theta: float, dim: int = 2) -> np.ndarray:
    """omega(theta) embedded in R^dim."""
    w = np.zeros(dim)
    w[0] = math.cos(theta)
    w[1] = math.sin(theta)
    return w


class GeodesicScan(NamedTuple):
    """Parameters of a non-geodesic verification run."""

    p: float
    q: float
    b: float
    tau_grid: np.ndarray
    theta_grid: np.ndarray

    @classmethod
    def create(
        cls,
        p: float = 2.0,
        q: float | str = 2.0,
        b: float = DEFAULT_B,
        tau_count: int = 11,
        theta_count: int = 10_001,
    ) -> "GeodesicScan":
        return cls(
            _check_p_strict(p),
            parse_q(q),
            _check_b(b),
            np.linspace(0.0, 1.0, tau_count),
            np.linspace(0.0, math.pi / 4, theta_count),
        )


def nongeodesic_pair(n: int = 2, b: float = DEFAULT_B) -> tuple[DiscreteMeasure, DiscreteMeasure]:
    """The pair (mu0, mu1) in R^n, n >= 2, supported in the first coordinate plane."""
    b = _check_b(b)
    if n < 2:
        raise InvalidParamError(f"the pair lives in R^n with n >= 2, got {n}")
    corners = np.zeros((4, n))
    corners[:, :2] = [(1, 1), (1, -1), (-1, 1), (-1, -1)]
    cross = np.zeros((4, n))
    cross[:, :2] = [(b, 0), (-b, 0), (0, b), (0, -b)]
    return DiscreteMeasure(corners), DiscreteMeasure(cross)


def w_p_theta(p: float, theta, b: float = DEFAULT_B):
    """Closed-form W_p^p between the projections of the pair on omega(theta)."""
    p = _check_p_strict(p)
    b = _check_b(b)
    t = _check_theta(theta)
    c, s = np.cos(t), np.sin(t)
    value = 0.5 * (((1.0 - b) * c + s) ** p + np.abs(c - (1.0 + b) * s) ** p)
    return float(value) if np.ndim(value) == 0 else value


def w_p_theta_solver(p: float, theta: float, b: float = DEFAULT_B) -> float:
    """Same quantity through projection and the 1D solver."""
    mu0, mu1 = nongeodesic_pair(2, b)
    w = unit(float(_check_theta(theta)))
    return wasserstein_1d(project(mu0, w), project(mu1, w), p) ** p


def f_p_root(p: float) -> float:
    """Unique root u > 1 of u^p + u^(p-1) - 3u - 1, by bisection to 1e-12."""
    p = _check_p_strict(p)

    def f(u: float) -> float:
        return u**p + u ** (p - 1.0) - 3.0 * u - 1.0

    hi = 10.0
    # Near p = 1 the root moves past 10
    while f(hi) <= 0:
        hi *= 2.0
    return float(bisect(f, 1.0, hi, xtol=ROOT_TOLERANCE))


def stationary_angle(p: float, b: float = DEFAULT_B) -> tuple[float, float]:
    """Interior stationary angle theta_p of w_p and the kink angle theta*.

    Returns:
        Tuple (theta_p, theta_star) with theta_star = arctan(1/(1+b))
    """
    b = _check_b(b)
    u = f_p_root(p)
    theta_p = math.atan((u - (1.0 - b)) / (1.0 + u * (1.0 + b)))
    theta_star = math.atan(1.0 / (1.0 + b))
    return theta_p, theta_star


class MonotonicityProfile(NamedTuple):
    theta_p: float
    theta_star: float
    decreasing_before: bool
    increasing_after: bool


def monotonicity_profile(
    p: float, b: float = DEFAULT_B, points: int = 2000
) -> MonotonicityProfile:
    """Check w_p falls on (0, theta_p) and rises on (theta_p, pi/4) on a grid."""
    theta_p, theta_star = stationary_angle(p, b)
    grid = np.linspace(0.0, math.pi / 4, points)
    steps = np.diff(w_p_theta(p, grid, b))
    mids = 0.5 * (grid[:-1] + grid[1:])
    cell = grid[1] - grid[0]
    before = mids < theta_p - cell
    after = mids > theta_p + cell
    return MonotonicityProfile(
        theta_p,
        theta_star,
        bool(np.all(steps[before] < 0)),
        bool(np.all(steps[after] > 0)),
    )


class NonGeodesicReport(NamedTuple):
    """Numbers behind the non-geodesic argument."""

    p: float
    q: float
    b: float
    endpoint_gap: float
    interior_deficit: float
    maximizers_at_endpoints: bool
    solver_mismatch: float
    midpoint_atoms: dict[str, list[float]]
    e_points: np.ndarray
    e_prime_points: np.ndarray
    three_direction_separation: float
    survivors: np.ndarray
    uncovered_atoms: list[float]
    refined_separation: float
    refinement_applies: bool
    candidate_midpoint_excess: float | None
    contradiction: bool

    @property
    def passed(self) -> bool:
        return self.maximizers_at_endpoints and self.contradiction


def _midpoint_atoms(mu0, mu1, w: np.ndarray) -> np.ndarray:
    return displacement_interpolate_1d(project(mu0, w), project(mu1, w), 0.5).atoms


def _distance_to(values: np.ndarray, targets: np.ndarray) -> np.ndarray:
    return np.min(np.abs(values[:, None] - targets[None, :]), axis=1)


def _candidate_excess(mu0, mu1, candidate: DiscreteMeasure, p: float) -> float:
    """Largest amount by which a candidate midpoint overshoots half of MK_{p,inf}."""
    dirs = circle_grid(8 * 360)
    half = 0.5 * sliced_distance(mu0, mu1, p, math.inf, dirs).aggregate
    left = sliced_distance(mu0, candidate, p, math.inf, dirs).aggregate
    right = sliced_distance(candidate, mu1, p, math.inf, dirs).aggregate
    return max(left, right) - half


def verify_nongeodesic(scan: GeodesicScan) -> NonGeodesicReport:
    """Run every numeric step of the non-geodesic argument in R^2."""
    p, q, b = scan.p, scan.q, scan.b
    mu0, mu1 = nongeodesic_pair(2, b)

    values = w_p_theta(p, scan.theta_grid, b)
    top = float(np.max(values))
    near_top = scan.theta_grid[values >= top - MEMBERSHIP_TOLERANCE]
    spacing = float(scan.theta_grid[1] - scan.theta_grid[0])
    maximizers_at_endpoints = bool(
        np.all((near_top <= spacing) | (near_top >= math.pi / 4 - spacing))
    )
    endpoint_gap = abs(w_p_theta(p, 0.0, b) - w_p_theta(p, math.pi / 4, b))
    interior_deficit = top - w_p_theta(p, math.pi / 8, b)

    sample = np.linspace(0.0, math.pi / 4, 100)
    solver_mismatch = max(
        abs(w_p_theta(p, t, b) - w_p_theta_solver(p, t, b)) for t in sample
    )

    e1, e2 = unit(0.0), unit(math.pi / 2)
    diagonal = unit(math.pi / 4)
    extra = unit(math.pi / 8)
    atoms = {
        "e1": _midpoint_atoms(mu0, mu1, e1),
        "e2": _midpoint_atoms(mu0, mu1, e2),
        "diagonal": _midpoint_atoms(mu0, mu1, diagonal),
        "pi/8": _midpoint_atoms(mu0, mu1, extra),
    }

    # Candidate support: coordinates forced by the axis midpoints
    e_points = np.array([(x, y) for x in atoms["e1"] for y in atoms["e2"]])
    diagonal_gap = _distance_to(e_points @ diagonal, atoms["diagonal"])
    in_both = diagonal_gap <= MEMBERSHIP_TOLERANCE
    e_prime_points = e_points[in_both]
    outside = diagonal_gap[~in_both]
    three_direction_separation = float(outside.min()) if outside.size else 0.0
    three_direction_empty = e_prime_points.shape[0] == 0

    extra_gap = _distance_to(e_prime_points @ extra, atoms["pi/8"])
    keep = extra_gap <= MEMBERSHIP_TOLERANCE
    survivors = e_prime_points[keep]
    eliminated = extra_gap[~keep]
    refined_separation = float(eliminated.min()) if eliminated.size else 0.0
    uncovered = [
        float(a)
        for a in atoms["e1"]
        if not np.any(np.abs(survivors[:, 0] - a) <= MEMBERSHIP_TOLERANCE)
    ]

    refinement_applies = 1.0 < q < math.inf
    refined_contradiction = refinement_applies and bool(uncovered)
    contradiction = (three_direction_empty and three_direction_separation >= MIN_SEPARATION) or (
        refined_contradiction and refined_separation >= MIN_SEPARATION
    )

    candidate_excess = None
    if math.isinf(q) and e_prime_points.shape[0] > 0:
        candidate = DiscreteMeasure(e_prime_points)
        candidate_excess = _candidate_excess(mu0, mu1, candidate, p)
        logger.info("uniform candidate midpoint overshoots half MK_{p,inf} by %.3e",
                    candidate_excess)

    return NonGeodesicReport(
        p=p,
        q=q,
        b=b,
        endpoint_gap=endpoint_gap,
        interior_deficit=interior_deficit,
        maximizers_at_endpoints=maximizers_at_endpoints,
        solver_mismatch=solver_mismatch,
        midpoint_atoms={k: v.tolist() for k, v in atoms.items()},
        e_points=e_points,
        e_prime_points=e_prime_points,
        three_direction_separation=three_direction_separation,
        survivors=survivors,
        uncovered_atoms=uncovered,
        refined_separation=refined_separation,
        refinement_applies=refinement_applies,
        candidate_midpoint_excess=candidate_excess,
        contradiction=contradiction,
    )


class LinearGeodesicRow(NamedTuple):
    tau1: float
    tau2: float
    lhs: float
    rhs: float

    @property
    def deviation(self) -> float:
        return abs(self.lhs - self.rhs)


def verify_linear_geodesic(
    mu0: DiscreteMeasure,
    mu1: DiscreteMeasure,
    q: float,
    tau_pairs: list[tuple[float, float]],
    dirs: DirectionSet,
    p: float = 1.0,
) -> list[LinearGeodesicRow]:
    """Compare MK_{p,q}(mu_t1, mu_t2) with |t1 - t2| MK_{p,q}(mu0, mu1) along mu_t = mix.

    For p = 1 the two agree; for p > 1 the left side is typically strictly larger.
    """
    full = sliced_distance(mu0, mu1, p, q, dirs).aggregate
    rows = []
    for t1, t2 in tau_pairs:
        lhs = sliced_distance(mix(mu0, mu1, t1), mix(mu0, mu1, t2), p, q, dirs).aggregate
        rows.append(LinearGeodesicRow(t1, t2, lhs, abs(t1 - t2) * full))
    return rows


class RemarkReport(NamedTuple):
    """Sliced distances from delta_0 to mu = delta_e1 and nu = (delta_e1 + delta_e2)/2."""

    p: float
    q: float
    mk_mu: float
    mk_nu: float
    sliced_mu: float
    sliced_nu: float
    constant: float
    tolerance: float
    expected: str

    @property
    def observed(self) -> str:
        if abs(self.sliced_nu - self.sliced_mu) <= self.tolerance:
            return "="
        return "<" if self.sliced_nu < self.sliced_mu else ">"

    @property
    def margin(self) -> float:
        return abs(self.sliced_nu - self.sliced_mu)

    @property
    def passed(self) -> bool:
        if self.expected == "=":
            return self.observed == "="
        return self.observed == self.expected and self.margin > 3.0 * self.tolerance


def remark_discrepancy(p: float, q: float, n: int, dirs: DirectionSet) -> RemarkReport:
    """Show that equal MK_p from delta_0 does not give equal sliced distances.

    Both targets sit at MK_p distance exactly 1 from delta_0; the sliced
    distance of nu falls below the constant when p < q and above it when p > q.
    """
    p = check_exponent(p)
    q = parse_q(q)
    if dirs.dim != n:
        raise InvalidParamError(f"direction set has dim {dirs.dim}, expected {n}")
    origin = DiscreteMeasure.dirac(np.zeros(n))
    basis = np.eye(n)
    mu = DiscreteMeasure.dirac(basis[0])
    nu = DiscreteMeasure(basis[:2], [0.5, 0.5])

    mu_report = sliced_distance(origin, mu, p, q, dirs)
    nu_report = sliced_distance(origin, nu, p, q, dirs)
    if dirs.deterministic:
        tolerance = 1e-6
    else:
        tolerance = 3.0 * math.hypot(mu_report.standard_error, nu_report.standard_error)
    expected = "=" if p == q else ("<" if p < q else ">")
    return RemarkReport(
        p=p,
        q=q,
        mk_mu=wasserstein_nd_exact(origin, mu, p),
        mk_nu=wasserstein_nd_exact(origin, nu, p),
        sliced_mu=mu_report.aggregate,
        sliced_nu=nu_report.aggregate,
        constant=m_constant(q, dirs),
        tolerance=tolerance,
        expected=expected,
    )

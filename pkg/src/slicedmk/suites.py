"""Verification suites: each one runs a family of numeric checks and reports rows."""

import logging
import math
from collections.abc import Callable
from typing import Any, NamedTuple

import numpy as np

from .counterexamples import (
    GeodesicScan,
    monotonicity_profile,
    remark_discrepancy,
    verify_linear_geodesic,
    verify_nongeodesic,
)
from .duality import build_certificate, verify_certificate
from .empirics import density_mass, validate_density, validate_projection
from .errors import InvalidParamError
from .measures import DiscreteMeasure
from .smk import check_comparison, per_direction_costs, sliced_distance, wasserstein_nd_exact
from .sphere import (
    circle_grid,
    format_q,
    lq_aggregate,
    lq_standard_error,
    m_constant,
    mc_directions,
)

logger = logging.getLogger(__name__)


class CheckRow(NamedTuple):
    """One check: observed value, the threshold it is held to, and the verdict."""

    check: str
    value: float
    threshold: str
    passed: bool


class SuiteOptions(NamedTuple):
    p: float = 2.0
    q: float = 2.0
    seed: int = 42
    seeds: int = 20
    workers: int | None = None


class SuiteResult(NamedTuple):
    name: str
    rows: list[CheckRow]
    options: SuiteOptions

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)

    def to_dict(self) -> dict[str, Any]:
        return {
            "suite": self.name,
            "p": self.options.p,
            "q": format_q(self.options.q),
            "seed": self.options.seed,
            "seeds": self.options.seeds,
            "passed": self.passed,
            "checks": [row._asdict() for row in self.rows],
        }


def random_measure(rng: np.random.Generator, max_atoms: int = 10, dim: int = 2) -> DiscreteMeasure:
    """Gaussian atoms with Dirichlet weights; 1 to max_atoms atoms."""
    size = int(rng.integers(1, max_atoms + 1))
    return DiscreteMeasure(rng.normal(size=(size, dim)), rng.dirichlet(np.ones(size)))


def metric_suite(opts: SuiteOptions) -> list[CheckRow]:
    """Triangle inequality, symmetry, identity and (p,q) monotonicity on random triples."""
    rng = np.random.default_rng(opts.seed)
    dirs = circle_grid(64)
    exponents_p = (1.0, 2.0, 3.0)
    exponents_q = (1.0, 2.0, math.inf)
    triangle = symmetry = identity = monotone = 0
    for _ in range(opts.seeds):
        a, b, c = (random_measure(rng) for _ in range(3))
        table = {}
        for p in exponents_p:
            pairs = {
                key: np.maximum(per_direction_costs(x, y, dirs.directions, p), 0.0) ** (1 / p)
                for key, (x, y) in {"ab": (a, b), "ba": (b, a), "bc": (b, c),
                                    "ac": (a, c), "aa": (a, a)}.items()
            }
            for q in exponents_q:
                d = {key: lq_aggregate(v, dirs.weights, q) for key, v in pairs.items()}
                table[p, q] = d["ab"]
                triangle += d["ac"] > d["ab"] + d["bc"] + 1e-10
                symmetry += d["ab"] != d["ba"]
                identity += d["aa"] != 0.0
        for (p, q), value in table.items():
            for (p2, q2), other in table.items():
                if p <= p2 and q <= q2 and value > other * (1 + 1e-12) + 1e-14:
                    monotone += 1
    return [
        CheckRow("triangle violations", triangle, "== 0", triangle == 0),
        CheckRow("symmetry violations", symmetry, "== 0", symmetry == 0),
        CheckRow("MK(mu, mu) != 0", identity, "== 0", identity == 0),
        CheckRow("(p,q) monotonicity violations", monotone, "== 0", monotone == 0),
    ]


def comparison_suite(opts: SuiteOptions) -> list[CheckRow]:
    """The constant M_{q,n}, homothety for Dirac pairs and the comparison inequality."""
    rows = []
    for n in (3, 4):
        dirs = mc_directions(n, 20_000, opts.seed + n)
        abs_first = np.abs(dirs.directions[:, 0])
        value = m_constant(2, dirs)
        se = lq_standard_error(abs_first, dirs.weights, 2)
        gap = abs(value - n**-0.5)
        rows.append(CheckRow(f"|M_2,{n} - n^-1/2| in SEs", gap / se, "<= 3", gap <= 3 * se))

    rng = np.random.default_rng(opts.seed)
    grid = circle_grid(720)
    worst = 0.0
    for _ in range(opts.seeds):
        p = float(rng.choice([2.0, 3.0]))
        mu = DiscreteMeasure.dirac(rng.normal(size=2))
        nu = random_measure(rng, 8)
        sliced = sliced_distance(mu, nu, p, p, grid).aggregate
        worst = max(worst, abs(sliced - m_constant(p, grid) * wasserstein_nd_exact(mu, nu, p)))
    rows.append(CheckRow("homothety |MK_pp - M_p MK_p|", worst, "<= 1e-6", worst <= 1e-6))

    failures = 0
    for _ in range(opts.seeds):
        p = float(rng.choice([1.0, 2.0, 3.0]))
        q = float(rng.choice([1.0, 2.0, 3.0, math.inf]))
        check = check_comparison(random_measure(rng, 8), random_measure(rng, 8), p, q, grid)
        failures += not check.ok
    rows.append(CheckRow("comparison inequality failures", failures, "== 0", failures == 0))
    return rows


def nongeodesic_suite(opts: SuiteOptions) -> list[CheckRow]:
    report = verify_nongeodesic(GeodesicScan.create(opts.p, opts.q))
    profile = monotonicity_profile(opts.p)
    rows = [
        CheckRow("|w_p(0) - w_p(pi/4)|", report.endpoint_gap, "<= 1e-12",
                 report.endpoint_gap <= 1e-12),
        CheckRow("w_p max - w_p(pi/8)", report.interior_deficit, ">= 1e-4",
                 report.interior_deficit >= 1e-4),
        CheckRow("maximizers only at 0, pi/4", float(report.maximizers_at_endpoints), "== 1",
                 report.maximizers_at_endpoints),
        CheckRow("closed form vs 1D solver", report.solver_mismatch, "<= 1e-10",
                 report.solver_mismatch <= 1e-10),
        CheckRow("w_p decreasing on (0, theta_p)", float(profile.decreasing_before), "== 1",
                 profile.decreasing_before),
        CheckRow("w_p increasing on (theta_p, pi/4)", float(profile.increasing_after), "== 1",
                 profile.increasing_after),
        CheckRow("E ∩ E' points (axes + diagonal)", len(report.e_prime_points), "info", True),
        CheckRow("survivors after omega(pi/8)", len(report.survivors), "info", True),
    ]
    if report.refinement_applies:
        rows.append(CheckRow("separation of eliminated points", report.refined_separation,
                             ">= 1e-2", report.refined_separation >= 1e-2))
    if report.candidate_midpoint_excess is not None:
        rows.append(CheckRow("uniform E ∩ E' midpoint excess", report.candidate_midpoint_excess,
                             "info", True))
    rows.append(CheckRow("midpoint contradiction", float(report.contradiction), "== 1",
                         report.contradiction))
    return rows


def linear_geodesic_suite(opts: SuiteOptions) -> list[CheckRow]:
    """Mixtures are MK_{1,q} geodesics; MK_{2,q} shows strict excess."""
    rng = np.random.default_rng(opts.seed)
    dirs = circle_grid(64)
    worst = 0.0
    strict = 0
    for _ in range(opts.seeds):
        mu0, mu1 = random_measure(rng, 5), random_measure(rng, 5)
        pairs = [tuple(sorted(rng.uniform(0, 1, 2))) for _ in range(5)]
        for row in verify_linear_geodesic(mu0, mu1, opts.q, pairs, dirs, p=1.0):
            worst = max(worst, row.deviation)
        witness = verify_linear_geodesic(mu0, mu1, opts.q, pairs[:1], dirs, p=2.0)[0]
        strict += witness.lhs > witness.rhs + 1e-9
    return [
        CheckRow("max |MK_1q(mu_s, mu_t) - |s-t| MK_1q|", worst, "<= 1e-9", worst <= 1e-9),
        CheckRow("p=2 instances with strict excess", strict, ">= 1", strict >= 1),
    ]


def duality_suite(opts: SuiteOptions) -> list[CheckRow]:
    rng = np.random.default_rng(opts.seed)
    dirs = circle_grid(64)
    gaps, admissible, norms, recomputed = [], 0, 0, 0.0
    for _ in range(opts.seeds):
        mu, nu = random_measure(rng, 8), random_measure(rng, 8)
        cert = build_certificate(mu, nu, opts.p, opts.q, dirs, opts.workers)
        check = verify_certificate(cert, mu, nu, dirs)
        gaps.append(cert.gap)
        admissible += check.admissible
        norms += check.norm_ok
        recomputed = max(recomputed, abs(check.dual_value - cert.dual_value))
    low, high = min(gaps), max(gaps)
    return [
        CheckRow("min primal - dual", low, ">= -1e-9", low >= -1e-9),
        CheckRow("max primal - dual", high, "<= 1e-5", high <= 1e-5),
        CheckRow("admissible certificates", admissible, f"== {opts.seeds}",
                 admissible == opts.seeds),
        CheckRow("zeta in unit ball", norms, f"== {opts.seeds}", norms == opts.seeds),
        CheckRow("recomputed dual drift", recomputed, "<= 1e-12", recomputed <= 1e-12),
    ]


def remark_suite(opts: SuiteOptions) -> list[CheckRow]:
    grid = circle_grid(720)
    rows = []
    for p, q in ((1.0, 2.0), (2.0, 1.0), (1.0, math.inf), (2.0, 2.0)):
        report = remark_discrepancy(p, q, 2, grid)
        rows.append(CheckRow(
            f"(p={p:g}, q={format_q(q)}) MK_pq(nu) {report.observed} MK_pq(mu)",
            report.margin, f"{report.expected} with margin > {3 * report.tolerance:g}",
            report.passed,
        ))
    return rows


def density_suite(opts: SuiteOptions) -> list[CheckRow]:
    rows = []
    for theta in (0.0, math.pi / 8, math.pi / 4):
        check = validate_density(theta, 100_000, opts.seed)
        rows.append(CheckRow(f"KS statistic theta={theta:.4f}", check.statistic,
                             f"<= {check.threshold:.4g}", bool(check.passed)))
        mass = density_mass(theta)
        rows.append(CheckRow(f"mass theta={theta:.4f}", abs(mass - 1.0), "<= 1e-12",
                             abs(mass - 1.0) <= 1e-12))
    omega = np.array([0.6, 0.0, 0.8])
    check = validate_projection(omega, 100_000, opts.seed)
    rows.append(CheckRow("KS statistic omega=(0.6, 0, 0.8)", check.statistic,
                         f"<= {check.threshold:.4g}", bool(check.passed)))
    return rows


SUITES: dict[str, Callable[[SuiteOptions], list[CheckRow]]] = {
    "metric": metric_suite,
    "comparison": comparison_suite,
    "nongeodesic": nongeodesic_suite,
    "linear-geodesic": linear_geodesic_suite,
    "duality": duality_suite,
    "remark": remark_suite,
    "density": density_suite,
}


def run_suite(name: str, opts: SuiteOptions) -> SuiteResult:
    """Run one named suite.

    Raises:
        InvalidParamError: If the suite name is unknown or seeds < 1
    """
    suite = SUITES.get(name)
    if suite is None:
        raise InvalidParamError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    if opts.seeds < 1:
        raise InvalidParamError(f"seeds must be at least 1, got {opts.seeds}")
    logger.info("running suite %s with %s", name, opts)
    rows = suite(opts)
    result = SuiteResult(name, rows, opts)
    logger.info("suite %s: %s", name, "PASS" if result.passed else "FAIL")
    return result

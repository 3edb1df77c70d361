"""Dual certificates for MK_{p,q}^p when p <= q.

For r = q/p the p-th power of the sliced distance is an L^r norm of the
per-direction costs, so it is bounded below by pairing those costs with any
non-negative zeta in the unit ball of L^r', and each cost in turn by its
one-dimensional Kantorovich dual. A certificate stores both layers.
"""

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, NamedTuple

import numpy as np

from .errors import (
    DegenerateInputError,
    DimMismatchError,
    HypothesisViolatedError,
    InvalidParamError,
    ShapeMismatchError,
)
from .measures import DiscreteMeasure, Measure1D
from .ot1d import (
    GridFunction,
    check_exponent,
    dual_value_1d,
    optimal_potentials_1d,
    wasserstein_1d,
)
from .sphere import DirectionSet, format_q, lq_aggregate, parse_q

logger = logging.getLogger(__name__)

ZETA_FLOOR = 1e-12
NORM_SLACK = 1e-12
ADMISSIBILITY_SLACK = 1e-12


def holder_conjugate(r: float) -> float:
    """r' with 1/r + 1/r' = 1."""
    if r == 1:
        return math.inf
    if math.isinf(r):
        return 1.0
    return r / (r - 1.0)


def weighted_norm(values: np.ndarray, weights: np.ndarray, r: float) -> float:
    """Weighted L^r norm of arbitrary-sign values."""
    return lq_aggregate(np.abs(values), weights, r)


def zeta_from_values(values: Any, weights: Any, r: float) -> np.ndarray:
    """Maximizer of sum w zeta v over positive zeta with ||zeta||_{r'} <= 1.

    Args:
        values: Non-negative per-direction costs
        weights: Direction weights
        r: Norm exponent q/p, at least 1 (may be infinite)

    Returns:
        Strictly positive zeta (floored at 1e-12) in the closed unit ball of L^{r'}

    Raises:
        InvalidParamError: If r < 1
        DegenerateInputError: If every value is zero and r > 1
    """
    if r < 1:
        raise InvalidParamError(f"r must be >= 1, got {r}")
    v = np.asarray(values, dtype=float).reshape(-1)
    w = np.asarray(weights, dtype=float).reshape(-1)
    if r == 1:
        return np.ones_like(v)
    if not np.any(v > 0):
        raise DegenerateInputError("all per-direction costs vanish")

    if math.isinf(r):
        # Point mass at the maximizing direction, with the floor paid for elsewhere
        top = int(np.argmax(v))
        zeta = np.full_like(v, ZETA_FLOOR)
        rest = float(w.sum() - w[top])
        zeta[top] = (1.0 - ZETA_FLOOR * rest) / w[top]
        return zeta

    norm = lq_aggregate(v, w, r)
    zeta = np.maximum((v / norm) ** (r - 1.0), ZETA_FLOOR)
    conjugate_norm = weighted_norm(zeta, w, holder_conjugate(r))
    if conjugate_norm > 1.0:
        zeta = zeta / conjugate_norm
    return zeta


class CertificateCheck(NamedTuple):
    admissible: bool
    norm_ok: bool
    dual_value: float
    worst_violation: float


class DualCertificate(NamedTuple):
    """Per-direction potentials, a zeta weighting and the resulting lower bound."""

    p: float
    q: float
    potentials: list[tuple[GridFunction, GridFunction]]
    zeta: np.ndarray
    dual_value: float
    primal_value: float
    dirset_id: str

    @property
    def r(self) -> float:
        return math.inf if math.isinf(self.q) else self.q / self.p

    @property
    def r_prime(self) -> float:
        return holder_conjugate(self.r)

    @property
    def gap(self) -> float:
        """primal - dual, where primal is MK_{p,q}^p."""
        return self.primal_value - self.dual_value

    def to_dict(self) -> dict[str, Any]:
        return {
            "p": self.p,
            "q": format_q(self.q),
            "potentials": [
                {"phi": phi.to_dict(), "psi": psi.to_dict()} for phi, psi in self.potentials
            ],
            "zeta": self.zeta.tolist(),
            "dual_value": self.dual_value,
            "primal_value": self.primal_value,
            "dirs": self.dirset_id,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "DualCertificate":
        try:
            potentials = [
                (GridFunction.from_dict(item["phi"]), GridFunction.from_dict(item["psi"]))
                for item in data["potentials"]
            ]
            return cls(
                float(data["p"]),
                parse_q(data["q"]),
                potentials,
                np.asarray(data["zeta"], dtype=float),
                float(data["dual_value"]),
                float(data["primal_value"]),
                str(data["dirs"]),
            )
        except (KeyError, TypeError) as e:
            raise InvalidParamError(f"malformed certificate JSON: {e}") from e

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True, indent=2))

    @classmethod
    def load(cls, path: str | Path) -> "DualCertificate":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _projections(m: DiscreteMeasure, dirs: DirectionSet) -> list[Measure1D]:
    proj = m.points @ dirs.directions.T
    return [Measure1D(proj[:, k], m.weights) for k in range(len(dirs))]


def _certificate_value(
    potentials: list[tuple[GridFunction, GridFunction]],
    zeta: np.ndarray,
    weights: np.ndarray,
    mu_proj: list[Measure1D],
    nu_proj: list[Measure1D],
) -> float:
    terms = [
        w * z * dual_value_1d(phi, psi, a, b)
        for (phi, psi), z, w, a, b in zip(potentials, zeta, weights, mu_proj, nu_proj, strict=True)
    ]
    return math.fsum(terms)


def build_certificate(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    p: float,
    q: float,
    dirs: DirectionSet,
    workers: int | None = None,
) -> DualCertificate:
    """Construct a certificate whose dual value matches MK_{p,q}^p on dirs.

    Raises:
        HypothesisViolatedError: If p > q
        DimMismatchError: If mu, nu and dirs disagree on dimension
    """
    p = check_exponent(p)
    q = parse_q(q)
    if p > q:
        raise HypothesisViolatedError(f"duality needs p <= q, got p={p}, q={q}")
    if mu.dim != nu.dim or dirs.dim != mu.dim:
        raise DimMismatchError(f"dims: mu {mu.dim}, nu {nu.dim}, directions {dirs.dim}")
    r = math.inf if math.isinf(q) else q / p

    mu_proj = _projections(mu, dirs)
    nu_proj = _projections(nu, dirs)

    def solve(k: int) -> tuple[tuple[GridFunction, GridFunction], float]:
        pair = optimal_potentials_1d(mu_proj[k], nu_proj[k], p)
        return pair, wasserstein_1d(mu_proj[k], nu_proj[k], p) ** p

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            solved = list(pool.map(solve, range(len(dirs))))
    else:
        solved = [solve(k) for k in range(len(dirs))]
    potentials = [pair for pair, _ in solved]
    costs = np.array([cost for _, cost in solved])

    try:
        zeta = zeta_from_values(costs, dirs.weights, r)
    except DegenerateInputError:
        logger.info("identical projections in every direction; using zeta = 1")
        zeta = np.ones_like(costs)

    primal = lq_aggregate(costs, dirs.weights, r)
    dual = _certificate_value(potentials, zeta, dirs.weights, mu_proj, nu_proj)
    logger.debug("certificate on %s: primal %.6g dual %.6g", dirs.identifier, primal, dual)
    return DualCertificate(p, q, potentials, zeta, dual, primal, dirs.identifier)


def verify_certificate(
    cert: DualCertificate, mu: DiscreteMeasure, nu: DiscreteMeasure, dirs: DirectionSet
) -> CertificateCheck:
    """Recheck admissibility, the zeta norm bound and the dual value from scratch.

    Raises:
        ShapeMismatchError: If the certificate was built for other directions or measures
    """
    if len(cert.potentials) != len(dirs) or cert.zeta.shape[0] != len(dirs):
        raise ShapeMismatchError(
            f"certificate has {len(cert.potentials)} directions, set has {len(dirs)}"
        )
    if cert.dirset_id != dirs.identifier:
        raise ShapeMismatchError(f"certificate built on {cert.dirset_id}, not {dirs.identifier}")
    if mu.dim != dirs.dim or nu.dim != dirs.dim:
        raise ShapeMismatchError("measure dimension does not match the direction set")

    worst = -math.inf
    for phi, psi in cert.potentials:
        grid = np.union1d(phi.grid, psi.grid)
        cost = np.abs(grid[:, None] - grid[None, :]) ** cert.p
        slack = ADMISSIBILITY_SLACK * max(1.0, float(cost.max()))
        excess = -phi.lookup(grid)[:, None] - psi.lookup(grid)[None, :] - cost - slack
        worst = max(worst, float(excess.max()))

    norm_ok = bool(np.all(cert.zeta > 0)) and (
        weighted_norm(cert.zeta, dirs.weights, cert.r_prime) <= 1.0 + NORM_SLACK
    )
    value = _certificate_value(
        cert.potentials, cert.zeta, dirs.weights, _projections(mu, dirs), _projections(nu, dirs)
    )
    return CertificateCheck(worst <= 0.0, norm_ok, value, worst)

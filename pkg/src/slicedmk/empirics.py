"""Projected densities of the uniform square and empirical sampling-rate experiments."""

import csv
import logging
import math
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy import stats

from .errors import InvalidParamError, TooLargeError
from .measures import DiscreteMeasure, sample_cube, sample_square
from .ot1d import check_exponent, quantile_costs
from .smk import (
    ASSIGNMENT_MAX_POINTS,
    direction_chunks,
    map_chunks,
    per_direction_costs,
    sorted_projections,
    wasserstein_nd_exact,
)
from .sphere import DirectionSet, lq_aggregate, parse_q

logger = logging.getLogger(__name__)

KS_CONSTANT = 1.63
KS_SLACK = 1.5
MIN_KS_SAMPLES = 1000
REFERENCE_FACTOR = 64
THETA_TOLERANCE = 1e-12


def _fold(theta: float) -> tuple[float, float]:
    if theta < -THETA_TOLERANCE or theta > math.pi / 4 + THETA_TOLERANCE:
        raise InvalidParamError(f"theta must lie in [0, pi/4], got {theta}")
    theta = min(max(theta, 0.0), math.pi / 4)
    return math.cos(theta), math.sin(theta)


def f_theta_density(theta: float, t):
    """Density of <X, omega(theta)> for X uniform on [-1, 1]^2, theta in [0, pi/4].

    Flat at 1/(2 cos) on |t| <= cos - sin, then linear down to zero at
    |t| = cos + sin. theta = 0 gives the uniform density on [-1, 1].
    """
    c, s = _fold(theta)
    x = np.abs(np.asarray(t, dtype=float))
    inner = x <= c - s
    density = np.where(inner, 1.0 / (2.0 * c), 0.0)
    if s > 0:
        ramp = (~inner) & (x <= c + s)
        density = np.where(ramp, (c + s - x) / (4.0 * c * s), density)
    return float(density) if np.ndim(density) == 0 else density


def theta_cdf(theta: float, t):
    """CDF matching f_theta_density."""
    c, s = _fold(theta)
    tt = np.asarray(t, dtype=float)
    x = np.abs(tt)
    upper = np.where(x <= c - s, 0.5 + x / (2.0 * c), 1.0)
    if s > 0:
        ramp = (x > c - s) & (x <= c + s)
        upper = np.where(ramp, 1.0 - (c + s - x) ** 2 / (8.0 * c * s), upper)
    cdf = np.where(tt >= 0, upper, 1.0 - upper)
    return float(cdf) if np.ndim(cdf) == 0 else cdf


def density_mass(theta: float) -> float:
    """Integral of f_theta_density over R, summed piece by piece in closed form (should be 1)."""
    c, s = _fold(theta)
    flat = 2.0 * (c - s) / (2.0 * c)
    # Each ramp is a triangle of base 2s and height 1/(2c)
    ramps = 2.0 * 0.5 * (2.0 * s) / (2.0 * c)
    return flat + ramps


def _folded_angle(omega: np.ndarray) -> tuple[float, float]:
    """Planar scale a and folded angle in [0, pi/4] of a direction in R^n."""
    a = math.hypot(float(omega[0]), float(omega[1]))
    if a == 0:
        return 0.0, 0.0
    phi = math.atan2(float(omega[1]), float(omega[0])) % (math.pi / 2)
    if phi > math.pi / 4:
        phi = math.pi / 2 - phi
    return a, phi


def projected_cdf(omega, t):
    """CDF of <X, omega> for X uniform on [-1, 1]^2 x {0}^(n-2).

    Only the planar part of omega matters: with a = |(omega_1, omega_2)| and the
    angle folded into [0, pi/4] by the square's symmetries, F(t) = F_theta(t / a).
    """
    direction = np.asarray(omega, dtype=float).reshape(-1)
    if direction.shape[0] < 2:
        raise InvalidParamError("directions for the square sampler need n >= 2")
    a, theta = _folded_angle(direction)
    tt = np.asarray(t, dtype=float)
    if a == 0:
        return np.where(tt >= 0, 1.0, 0.0)
    return theta_cdf(theta, tt / a)


class DensityCheck(NamedTuple):
    """Kolmogorov-Smirnov comparison of projected samples with the closed form."""

    theta: float
    N: int
    statistic: float
    threshold: float
    passed: bool | None


def _ks_check(samples: np.ndarray, cdf, theta: float) -> DensityCheck:
    N = samples.shape[0]
    statistic = float(stats.kstest(samples, cdf).statistic)
    threshold = KS_SLACK * KS_CONSTANT / math.sqrt(N)
    passed = statistic <= threshold if N >= MIN_KS_SAMPLES else None
    return DensityCheck(theta, N, statistic, threshold, passed)


def validate_density(theta: float, N: int, seed: int) -> DensityCheck:
    """KS statistic of N projected square samples against theta_cdf.

    Below 1000 samples the statistic is returned without a verdict.
    """
    c, s = _fold(theta)
    points = sample_square(N, 2, seed).points
    return _ks_check(points @ np.array([c, s]), lambda t: theta_cdf(theta, t), theta)


def validate_projection(omega, N: int, seed: int) -> DensityCheck:
    """KS check of projected square samples in R^n against projected_cdf."""
    direction = np.asarray(omega, dtype=float).reshape(-1)
    points = sample_square(N, direction.shape[0], seed).points
    _, theta = _folded_angle(direction)
    return _ks_check(points @ direction, lambda t: projected_cdf(direction, t), theta)


def sampling_bound(p: float, q: float, N: int) -> float | None:
    """Theoretical bound on E[MK_{p,q}(mu_N, mu)^p]; None where it does not apply.

    The bound needs p >= 2 and finite q.
    """
    p = check_exponent(p)
    q = parse_q(q)
    if p < 2 or math.isinf(q):
        return None
    if q <= p:
        factor = (5.0 * p) ** p * 2.0 ** (p + 1.0)
    else:
        factor = ((5.0 * q) ** q * 2.0 ** (q + 1.0)) ** (p / q)
    return factor * N ** (-p / 2.0)


class RateRecord(NamedTuple):
    """Mean of a sampling statistic at sample size N."""

    N: int
    trials: int
    mean: float
    std_error: float
    statistic_id: str
    bound: float | None

    @property
    def passed(self) -> bool | None:
        return None if self.bound is None else self.mean <= self.bound


class SlopeFit(NamedTuple):
    slope: float
    intercept: float
    stderr: float

    @property
    def constant(self) -> float:
        return math.exp(self.intercept)


def fit_log_slope(Ns, means) -> SlopeFit:
    """Least-squares fit of log(mean) against log(N)."""
    x = np.log(np.asarray(Ns, dtype=float))
    y = np.log(np.asarray(means, dtype=float))
    if x.size < 2:
        raise InvalidParamError("a slope fit needs at least two sample sizes")
    fit = stats.linregress(x, y)
    return SlopeFit(float(fit.slope), float(fit.intercept), float(fit.stderr))


class ReferenceSlices:
    """Sorted projections of a fixed reference measure, computed once per chunk of directions."""

    def __init__(self, reference: DiscreteMeasure, dirs: DirectionSet, chunk_atoms: int):
        self.dirs = dirs
        self.chunks = direction_chunks(len(dirs), reference.size + chunk_atoms)
        self.slices = [sorted_projections(reference, dirs.directions[c]) for c in self.chunks]

    def costs(self, sample: DiscreteMeasure, p: float, workers: int | None = None) -> np.ndarray:
        """W_p^p between the sample and the reference, per direction."""

        def run(index: int) -> np.ndarray:
            xa, ca = sorted_projections(sample, self.dirs.directions[self.chunks[index]])
            xb, cb = self.slices[index]
            return quantile_costs(xa, ca, xb, cb, p)

        return np.concatenate(map_chunks(run, list(range(len(self.chunks))), workers))


def _statistic_id(p: float, q: float) -> str:
    return f"SlicedPQ(p={p:g},q={'inf' if math.isinf(q) else format(q, 'g')})"


def _seed(seed: int, N: int, trial: int, stream: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed, N, trial, stream])


def _record(N: int, samples: list[float], statistic_id: str, bound: float | None) -> RateRecord:
    values = np.asarray(samples)
    se = float(np.std(values, ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
    return RateRecord(N, int(values.size), float(values.mean()), se, statistic_id, bound)


def sampling_rate_experiment(
    p: float,
    q: float,
    Ns: list[int],
    trials: int,
    dirs: DirectionSet,
    seed: int,
    reference_factor: int = REFERENCE_FACTOR,
    track_direction: int | None = None,
    workers: int | None = None,
) -> list[RateRecord]:
    """Mean of MK_{p,q}(mu_N, mu_ref)^p for empirical measures of the uniform square.

    The reference is one empirical measure with reference_factor * max(Ns)
    points, drawn independently of every trial.

    Args:
        p: Transport exponent
        q: Aggregation exponent
        Ns: Sample sizes
        trials: Independent draws per sample size
        dirs: Direction set in R^n, n >= 2
        seed: Base seed; every draw gets its own spawned stream
        reference_factor: Reference size relative to the largest N
        track_direction: Also record W_p^p along this direction index
        workers: Thread count for chunks of directions

    Returns:
        One RateRecord per N (two when a direction is tracked)
    """
    p = check_exponent(p)
    q = parse_q(q)
    if trials < 1 or not Ns or min(Ns) < 1:
        raise InvalidParamError("need at least one trial and positive sample sizes")
    if reference_factor < 1:
        raise InvalidParamError(f"reference factor must be positive, got {reference_factor}")
    if track_direction is not None and not 0 <= track_direction < len(dirs):
        raise InvalidParamError(f"direction index {track_direction} out of range")

    reference = sample_square(reference_factor * max(Ns), dirs.dim, _seed(seed, 0, 0, 2))
    slices = ReferenceSlices(reference, dirs, max(Ns))
    sliced_id = _statistic_id(p, q)

    records = []
    for N in Ns:
        sliced, tracked = [], []
        for trial in range(trials):
            sample = sample_square(N, dirs.dim, _seed(seed, N, trial, 0))
            costs = slices.costs(sample, p, workers)
            values = np.maximum(costs, 0.0) ** (1.0 / p)
            sliced.append(lq_aggregate(values, dirs.weights, q) ** p)
            if track_direction is not None:
                tracked.append(float(costs[track_direction]))
        records.append(_record(N, sliced, sliced_id, sampling_bound(p, q, N)))
        if track_direction is not None:
            records.append(
                _record(N, tracked, f"PerDirection(p={p:g},omega={track_direction})",
                        sampling_bound(p, p, N))
            )
        logger.info("N=%d: mean %.4g over %d trials", N, records[-1].mean, trials)
    return records


class SeparationRow(NamedTuple):
    N: int
    classical: RateRecord
    sliced: RateRecord

    @property
    def ratio(self) -> float:
        return self.classical.mean / self.sliced.mean if self.sliced.mean > 0 else math.inf


class SeparationTable(NamedTuple):
    """Classical versus sliced sampling rates; numerical evidence only."""

    rows: list[SeparationRow]
    classical_fit: SlopeFit
    sliced_fit: SlopeFit

    @property
    def ratio_increasing(self) -> bool:
        ratios = [row.ratio for row in self.rows]
        return all(b >= a for a, b in zip(ratios, ratios[1:], strict=False))

    @property
    def slope_gap(self) -> float:
        """Sliced slope minus classical slope; negative when sliced decays faster."""
        return self.sliced_fit.slope - self.classical_fit.slope


def rate_separation_experiment(
    p: float,
    q: float,
    Ns: list[int],
    trials: int,
    dirs: DirectionSet,
    seed: int,
    sampler: str = "cube",
    workers: int | None = None,
) -> SeparationTable:
    """MK_p and MK_{p,q} between two independent N-samples, for growing N.

    Args:
        sampler: "cube" (uniform on [0, 1]^n) or "square" (planar square in R^n)

    Raises:
        InvalidParamError: If Ns is empty or holds a non-positive size, or trials < 1
        TooLargeError: If some N exceeds the assignment cap
    """
    p = check_exponent(p)
    q = parse_q(q)
    if trials < 1 or not Ns or min(Ns) < 1:
        raise InvalidParamError("need at least one trial and positive sample sizes")
    if max(Ns) > ASSIGNMENT_MAX_POINTS:
        raise TooLargeError("assignment_points", ASSIGNMENT_MAX_POINTS, max(Ns))
    draw = {"cube": sample_cube, "square": sample_square}.get(sampler)
    if draw is None:
        raise InvalidParamError(f"unknown sampler {sampler!r}")

    classical_id = f"ClassicalP(p={p:g})"
    sliced_id = _statistic_id(p, q)
    rows = []
    for N in Ns:
        classical, sliced = [], []
        for trial in range(trials):
            a = draw(N, dirs.dim, _seed(seed, N, trial, 0))
            b = draw(N, dirs.dim, _seed(seed, N, trial, 1))
            classical.append(wasserstein_nd_exact(a, b, p) ** p)
            costs = per_direction_costs(a, b, dirs.directions, p, workers)
            values = np.maximum(costs, 0.0) ** (1.0 / p)
            sliced.append(lq_aggregate(values, dirs.weights, q) ** p)
        rows.append(
            SeparationRow(N, _record(N, classical, classical_id, None),
                          _record(N, sliced, sliced_id, None))
        )
        logger.info("N=%d: classical/sliced ratio %.3f", N, rows[-1].ratio)

    return SeparationTable(
        rows,
        fit_log_slope(Ns, [row.classical.mean for row in rows]),
        fit_log_slope(Ns, [row.sliced.mean for row in rows]),
    )


RATE_COLUMNS = ["N", "statistic_id", "mean", "std_error", "bound", "pass"]


def _csv_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(value) if isinstance(value, float) else str(value)


def write_rate_csv(records: list[RateRecord], path: str | Path) -> None:
    """Write sampling-rate records, one row per (N, statistic)."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(RATE_COLUMNS)
        for r in records:
            writer.writerow(
                [_csv_value(v) for v in
                 (r.N, r.statistic_id, r.mean, r.std_error, r.bound, r.passed)]
            )


def write_separation_csv(table: SeparationTable, path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["N", "classical_mean", "classical_se", "sliced_mean", "sliced_se",
                         "ratio"])
        for row in table.rows:
            writer.writerow([_csv_value(v) for v in (
                row.N, row.classical.mean, row.classical.std_error,
                row.sliced.mean, row.sliced.std_error, row.ratio,
            )])

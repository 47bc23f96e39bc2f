"""Distances, goodness-of-fit tests and trend reports used to judge simulations."""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from ..errors import ConvergenceError, InsufficientSamplesError
from .estimate import Z_95, Estimate

logger = logging.getLogger(__name__)

MIN_KS_SAMPLES = 100
MIN_EXPECTED_COUNT = 5.0
# Standard deviation of the Kolmogorov limit law of sqrt(n) D_n.
KS_SD = math.sqrt(math.pi**2 / 12 - (math.pi / 2) * math.log(2) ** 2)


def ks_distance(samples, cdf: Callable, mass_at_minus_inf: float = 0.0) -> float:
    """sup |F_n - F| with F = m + (1 - m) cdf and an atom of mass m at -inf."""
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    if n < MIN_KS_SAMPLES:
        raise InsufficientSamplesError(f"KS distance needs at least {MIN_KS_SAMPLES} samples, got {n}")
    if not 0 <= mass_at_minus_inf <= 1:
        raise ValueError("Mass at -inf must lie in [0, 1]")
    below = int(np.count_nonzero(samples == -math.inf))
    distance = abs(below / n - mass_at_minus_inf)
    finite = np.sort(samples[np.isfinite(samples)])
    if finite.size:
        target = mass_at_minus_inf + (1.0 - mass_at_minus_inf) * np.asarray(cdf(finite), dtype=float)
        steps = below + np.arange(1, finite.size + 1)
        distance = max(
            distance,
            float(np.max(np.abs(steps / n - target))),
            float(np.max(np.abs((steps - 1) / n - target))),
        )
    return distance


def ks_pvalue(distance: float, n: int) -> float:
    return float(stats.kstwo.sf(distance, n))


def ks_estimate(distance: float, n: int) -> Estimate:
    """A KS distance with the asymptotic spread of sqrt(n) D_n as its error bar."""
    return Estimate(distance, Z_95 * KS_SD / math.sqrt(n))


def empirical_cdf_estimate(samples, x: float) -> Estimate:
    samples = np.asarray(samples, dtype=float)
    return Estimate.proportion(int(np.count_nonzero(samples <= x)), samples.size)


def histogram_with_tail(samples, k_max: int) -> np.ndarray:
    """Counts of the values 1..k_max followed by the count of values above k_max."""
    samples = np.asarray(samples, dtype=np.int64)
    if np.any(samples < 1):
        raise ValueError("Histogram values must be positive integers")
    counts = np.bincount(np.minimum(samples, k_max + 1), minlength=k_max + 2)
    return counts[1:]


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    p_value: float
    bins: int
    pooled: bool = False

    def __iter__(self):
        return iter((self.statistic, self.p_value))


def _pool(observed: np.ndarray, expected: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    obs_out: List[float] = []
    exp_out: List[float] = []
    o_acc = e_acc = 0.0
    for o, e in zip(observed, expected):
        o_acc += o
        e_acc += e
        if e_acc >= MIN_EXPECTED_COUNT:
            obs_out.append(o_acc)
            exp_out.append(e_acc)
            o_acc = e_acc = 0.0
    if e_acc > 0 or o_acc > 0:
        if exp_out:
            obs_out[-1] += o_acc
            exp_out[-1] += e_acc
        else:
            obs_out.append(o_acc)
            exp_out.append(e_acc)
    return np.array(obs_out), np.array(exp_out)


def chi_square_gof(counts, law: Union[Callable[[int], float], Sequence[float]]) -> ChiSquareResult:
    """Pearson test of counts over bins 1..K plus a tail bin.

    ``law`` is either P(k) as a function of k or the list of bin probabilities
    (tail included). Bins with expected count below 5 are pooled with their
    neighbours.
    """
    observed = np.asarray(counts, dtype=float)
    n = observed.sum()
    if n <= 0:
        raise InsufficientSamplesError("Chi-square test needs at least one observation")
    if callable(law):
        head = np.array([law(k) for k in range(1, observed.size)], dtype=float)
        probabilities = np.append(head, max(0.0, 1.0 - head.sum()))
    else:
        probabilities = np.asarray(law, dtype=float)
    if probabilities.size != observed.size:
        raise ValueError("Law and histogram have different numbers of bins")
    expected = n * probabilities
    pooled_observed, pooled_expected = _pool(observed, expected)
    pooled = pooled_observed.size < observed.size
    if pooled:
        logger.warning(f"Chi-square: pooled {observed.size} bins into {pooled_observed.size} to keep expected counts >= 5")
    if pooled_observed.size < 2:
        return ChiSquareResult(0.0, 1.0, int(pooled_observed.size), pooled)
    statistic = float(np.sum((pooled_observed - pooled_expected) ** 2 / pooled_expected))
    p_value = float(stats.chi2.sf(statistic, pooled_observed.size - 1))
    return ChiSquareResult(statistic, p_value, int(pooled_observed.size), pooled)


@dataclass(frozen=True)
class LaplaceComparison:
    empirical: Estimate
    target: Estimate

    @property
    def overlap(self) -> bool:
        return self.empirical.overlaps(self.target)

    @property
    def standard_errors_apart(self) -> float:
        """|empirical - target| in units of the pooled standard error."""
        spread = math.hypot(self.empirical.standard_error, self.target.standard_error)
        gap = abs(self.empirical.value - self.target.value)
        if spread == 0:
            return 0.0 if gap == 0 else math.inf
        return gap / spread

    def agrees(self, standard_errors: float) -> bool:
        return self.standard_errors_apart <= standard_errors

    def describe(self) -> str:
        verdict = "overlap" if self.overlap else "NO overlap"
        return (
            f"empirical {self.empirical.value:.5f} +- {self.empirical.half_width:.5f} vs "
            f"target {self.target.value:.5f} +- {self.target.half_width:.5f}: {verdict}, "
            f"{self.standard_errors_apart:.2f} SE apart"
        )


def laplace_compare(measures: Sequence, g: Callable, target: Estimate) -> LaplaceComparison:
    """Mean of exp(-N(g)) over the measures, compared with the target by CI overlap."""
    return laplace_compare_values([m.evaluate(g) for m in measures], target)


def laplace_compare_values(evaluations, target: Estimate) -> LaplaceComparison:
    """Same comparison from precomputed values N(g)."""
    evaluations = np.asarray(evaluations, dtype=float)
    if evaluations.size == 0:
        raise InsufficientSamplesError("Laplace comparison needs at least one measure")
    values = np.exp(-evaluations)
    empirical = Estimate.from_samples(values) if values.size > 1 else Estimate.exact(values[0])
    return LaplaceComparison(empirical, target)


@dataclass(frozen=True)
class ConvergenceRow:
    t: float
    value: float
    gap: float
    standard_error: float


@dataclass(frozen=True)
class ConvergenceReport:
    limit: float
    rows: Tuple[ConvergenceRow, ...]
    monotone: bool
    final_ok: bool
    tolerance: Optional[float] = None
    violations: Tuple[float, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return self.monotone and self.final_ok

    @property
    def final_gap(self) -> float:
        return self.rows[-1].gap

    def table(self) -> str:
        lines = [f"{'t':>8} {'value':>12} {'gap':>12} {'se':>10}"]
        for row in self.rows:
            lines.append(f"{row.t:>8.3g} {row.value:>12.6g} {row.gap:>12.4g} {row.standard_error:>10.3g}")
        tolerance = "none" if self.tolerance is None else f"{self.tolerance:.4g}"
        lines.append(
            f"limit {self.limit:.6g}; nonincreasing gap: {self.monotone}; "
            f"final gap {self.final_gap:.4g} (tolerance {tolerance}): {self.final_ok}"
        )
        return "\n".join(lines)


def convergence_report(
    stat_by_t: Mapping[float, Union[float, Estimate]],
    limit: float,
    tolerance: Optional[float] = None,
    slack: float = 1.0,
) -> ConvergenceReport:
    """Check that |stat(t) - limit| does not grow along the t grid and ends below ``tolerance``.

    A step may increase the gap by at most ``slack`` pooled standard errors.
    """
    if len(stat_by_t) < 3:
        raise ConvergenceError(f"A trend check needs at least three t values, got {len(stat_by_t)}")
    rows = []
    for t in sorted(stat_by_t):
        stat = stat_by_t[t]
        estimate = stat if isinstance(stat, Estimate) else Estimate.exact(stat)
        rows.append(ConvergenceRow(float(t), estimate.value, abs(estimate.value - limit), estimate.standard_error))
    violations = []
    for before, after in zip(rows, rows[1:]):
        allowance = slack * math.hypot(before.standard_error, after.standard_error)
        if after.gap > before.gap + allowance:
            violations.append(after.t)
    final_ok = tolerance is None or rows[-1].gap < tolerance
    return ConvergenceReport(limit, tuple(rows), not violations, final_ok, tolerance, tuple(violations))

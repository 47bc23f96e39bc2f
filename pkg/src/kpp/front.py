"""Fisher-KPP fronts through the particle representation u_g(t, x) = E exp(-sum_v g(xi_t^v + x)).

All x evaluated at one t reuse the same batch of simulated trees, so
comparisons along a bisection see common random numbers.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from ..branching import BranchingConfig
from ..errors import BracketError, InsufficientSamplesError, InvalidSpecError
from ..levy_motion import MotionSpec, tail_scale
from ..normalization import compute_h
from ..rng import RandomStream
from ..tree import simulate_tree
from ..verify import ConvergenceReport, Estimate, convergence_report

logger = logging.getLogger(__name__)

MIN_TREES = 1000
FAST_MULTIPLIERS = (1.0, 2.0, 4.0, 8.0)
SLOW_MULTIPLIERS = (1.0, 0.5, 0.25, 0.125, 0.0)
RELATIVE_WIDTH = 0.02
MAX_BISECTIONS = 200


@dataclass(frozen=True)
class Ramp:
    """0 below ``start``, linear up to ``height`` at ``start + width``, flat afterwards."""

    start: float = 0.0
    width: float = 1.0
    height: float = 1.0

    def __post_init__(self):
        if not self.width > 0 or not self.height >= 0:
            raise InvalidSpecError("A ramp needs width > 0 and height >= 0")

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        return self.height * np.clip((y - self.start) / self.width, 0.0, 1.0)

    def weight(self, positions: np.ndarray, offsets: np.ndarray) -> np.ndarray:
        return _reduce_weights(self(positions), offsets)


@dataclass(frozen=True)
class HardIndicator:
    """g = inf on [threshold, inf), 0 elsewhere; a measurable, discontinuous front function."""

    threshold: float = 0.0

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        return np.where(y >= self.threshold, math.inf, 0.0)

    def weight(self, positions: np.ndarray, offsets: np.ndarray) -> np.ndarray:
        hits = (positions >= self.threshold).astype(np.int64)
        return (_segment_sums(hits, offsets) == 0).astype(float)


@dataclass(frozen=True)
class ZeroFunction:
    def __call__(self, y):
        return np.zeros_like(np.asarray(y, dtype=float))

    def weight(self, positions: np.ndarray, offsets: np.ndarray) -> np.ndarray:
        return np.ones(offsets.size - 1)


FrontFunction = Union[Ramp, HardIndicator, ZeroFunction]


def _segment_sums(values: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    cumulative = np.concatenate([[0], np.cumsum(values)])
    return cumulative[offsets[1:]] - cumulative[offsets[:-1]]


def _reduce_weights(g_values: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    return np.exp(-_segment_sums(g_values, offsets))


@dataclass(frozen=True)
class TreeBatch:
    """Alive-leaf positions of n trees at one time t, stored flat with offsets."""

    t: float
    positions: np.ndarray
    offsets: np.ndarray = field(repr=False)

    @classmethod
    def from_position_arrays(cls, t: float, arrays: Sequence[np.ndarray]) -> "TreeBatch":
        sizes = np.array([len(a) for a in arrays], dtype=np.int64)
        offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
        positions = np.concatenate(arrays) if len(arrays) else np.zeros(0)
        return cls(float(t), np.asarray(positions, dtype=float), offsets)

    @property
    def size(self) -> int:
        return int(self.offsets.size - 1)

    def rightmost(self) -> np.ndarray:
        """R_t per tree, -inf for extinct trees."""
        out = np.full(self.size, -math.inf)
        for i in range(self.size):
            segment = self.positions[self.offsets[i] : self.offsets[i + 1]]
            if segment.size:
                out[i] = segment.max()
        return out

    def weights(self, g: FrontFunction, x: float) -> np.ndarray:
        """exp(-sum_v g(xi_t^v + x)) per tree."""
        return g.weight(self.positions + x, self.offsets)


def simulate_leaf_batch(cfg: BranchingConfig, motion: MotionSpec, t: float, n: int, rng: RandomStream) -> TreeBatch:
    arrays = []
    for _ in range(n):
        tree = simulate_tree(cfg, motion, t, rng)
        arrays.append(tree.position[tree.alive])
    return TreeBatch.from_position_arrays(t, arrays)


def _require_batch(cfg, motion, t, n, rng) -> TreeBatch:
    if rng is None:
        raise ValueError("Simulating a tree batch needs a random stream")
    return simulate_leaf_batch(cfg, motion, t, n, rng)


def u_from_batch(batch: TreeBatch, g: FrontFunction, x: float) -> Estimate:
    if batch.size < MIN_TREES:
        raise InsufficientSamplesError(f"Estimating u needs at least {MIN_TREES} trees, got {batch.size}")
    if batch.t == 0:
        return Estimate.exact(math.exp(-float(g(x))))
    return Estimate.from_samples(batch.weights(g, x))


def estimate_u(
    cfg: BranchingConfig,
    motion: MotionSpec,
    g: FrontFunction,
    t: float,
    x: float,
    n: int,
    rng: Optional[RandomStream] = None,
    batch: Optional[TreeBatch] = None,
) -> Estimate:
    """u_g(t, x) with a 95% CI, exact at t = 0 and for g = 0."""
    if n < MIN_TREES:
        raise InsufficientSamplesError(f"Estimating u needs at least {MIN_TREES} trees, got {n}")
    if t == 0:
        return Estimate.exact(math.exp(-float(g(x))))
    if isinstance(g, ZeroFunction):
        return Estimate.exact(1.0)
    batch = batch or _require_batch(cfg, motion, t, n, rng)
    return u_from_batch(batch, g, x)


@dataclass(frozen=True)
class FrontPoint:
    t: float
    level: float
    x: float
    one_minus_u: Estimate
    x_half_width: float

    @property
    def log_front(self) -> float:
        return math.log(abs(self.x)) if self.x != 0 else -math.inf


def default_bracket(cfg: BranchingConfig, motion: MotionSpec, t: float) -> Tuple[float, float]:
    h = compute_h(cfg.lam, tail_scale(motion), t)
    return (-100.0 * h, 0.0)


def front_position(
    cfg: BranchingConfig,
    motion: MotionSpec,
    g: FrontFunction,
    t: float,
    level: float,
    n: int,
    rng: Optional[RandomStream] = None,
    bracket: Optional[Tuple[float, float]] = None,
    batch: Optional[TreeBatch] = None,
) -> FrontPoint:
    """Bisection for 1 - u_g(t, x) = level.

    Stops as soon as the CI at the midpoint contains ``level`` or the bracket
    is narrower than 2% of the midpoint magnitude.
    """
    if not 0 < level < 1:
        raise ValueError(f"Front level must lie in (0, 1), got {level}")
    batch = batch or _require_batch(cfg, motion, t, n, rng)
    lo, hi = bracket or default_bracket(cfg, motion, t)

    def profile(x: float) -> Estimate:
        u = u_from_batch(batch, g, x)
        return Estimate(1.0 - u.value, u.half_width)

    at_lo, at_hi = profile(lo), profile(hi)
    if not at_lo.value <= level <= at_hi.value:
        raise BracketError(
            f"1-u does not bracket {level} on [{lo:.4g}, {hi:.4g}]: values {at_lo.value:.4f}, {at_hi.value:.4f}"
        )
    for _ in range(MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        at_mid = profile(mid)
        if at_mid.contains(level) or (hi - lo) < RELATIVE_WIDTH * abs(mid):
            return FrontPoint(t, level, mid, at_mid, 0.5 * (hi - lo))
        if at_mid.value < level:
            lo = mid
        else:
            hi = mid
    raise BracketError(f"Front bisection did not settle after {MAX_BISECTIONS} steps")


@dataclass(frozen=True)
class FrontSpeed:
    slope: float
    standard_error: float
    target: float

    @property
    def relative_deviation(self) -> float:
        return abs(self.slope - self.target) / self.target


def front_speed(trace: Sequence[FrontPoint], lam: float, alpha: float) -> FrontSpeed:
    """Slope of log|front| against t, to compare with lam / alpha."""
    if len(trace) < 2:
        raise InsufficientSamplesError("A front speed needs at least two times")
    fit = stats.linregress([p.t for p in trace], [p.log_front for p in trace])
    return FrontSpeed(float(fit.slope), float(fit.stderr), lam / alpha)


@dataclass(frozen=True)
class BandCheck:
    fast: ConvergenceReport
    slow: ConvergenceReport
    fast_grid: Dict[float, List[float]]
    slow_grid: Dict[float, List[float]]

    @property
    def passed(self) -> bool:
        return self.fast.passed and self.slow.passed


def _sup(estimates: List[Estimate]) -> Estimate:
    return max(estimates, key=lambda e: e.value)


def front_band_check(
    cfg: BranchingConfig,
    motion: MotionSpec,
    g: FrontFunction,
    t_grid: Sequence[float],
    gamma_fast: float,
    gamma_slow: float,
    n: int,
    rng: Optional[RandomStream] = None,
    tolerance: float = 0.1,
    batches: Optional[Dict[float, TreeBatch]] = None,
) -> BandCheck:
    """sup (1 - u) far left of the front and sup u behind it both go to 0.

    Far left: x = -e^{gamma_fast t} * {1, 2, 4, 8}. Behind the front:
    x = -e^{gamma_slow t} * {1, 1/2, 1/4, 1/8, 0}.
    """
    if cfg.offspring.p0 != 0:
        raise InvalidSpecError("The band check needs p0 = 0 so that the population survives")
    speed = cfg.lam / tail_scale(motion).alpha
    if not gamma_slow < speed < gamma_fast:
        raise InvalidSpecError(f"Need gamma_slow < lam/alpha = {speed:.4g} < gamma_fast")
    fast_stats: Dict[float, Estimate] = {}
    slow_stats: Dict[float, Estimate] = {}
    fast_grid: Dict[float, List[float]] = {}
    slow_grid: Dict[float, List[float]] = {}
    for t in t_grid:
        batch = (batches or {}).get(t) or _require_batch(cfg, motion, t, n, rng)
        fast_x = [-math.exp(gamma_fast * t) * k for k in FAST_MULTIPLIERS]
        slow_x = [-math.exp(gamma_slow * t) * k for k in SLOW_MULTIPLIERS]
        far_left = []
        for x in fast_x:
            u = u_from_batch(batch, g, x)
            far_left.append(Estimate(1.0 - u.value, u.half_width))
        fast_stats[t] = _sup(far_left)
        slow_stats[t] = _sup([u_from_batch(batch, g, x) for x in slow_x])
        fast_grid[t], slow_grid[t] = fast_x, slow_x
        logger.info(f"Band check t={t}: sup(1-u)={fast_stats[t].value:.4f}, sup u={slow_stats[t].value:.4f}")
    return BandCheck(
        fast=convergence_report(fast_stats, 0.0, tolerance),
        slow=convergence_report(slow_stats, 0.0, tolerance),
        fast_grid=fast_grid,
        slow_grid=slow_grid,
    )

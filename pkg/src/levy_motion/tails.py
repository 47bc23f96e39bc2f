import math
from dataclasses import dataclass
from typing import Dict, Sequence

import numpy as np
from scipy.integrate import quad

from ..normalization import TailScale, compute_h, v_alpha_interval
from ..rng import RandomStream
from ..verify.estimate import Estimate
from .sampling import sample_increment
from .spec import CompositeSum, MotionSpec, NonSymmetricOneStable, tail_scale


@dataclass(frozen=True)
class TailApproximation:
    value: float
    is_bound: bool = False


def tail_asymptote(spec: MotionSpec, s: float, x: float) -> TailApproximation:
    """First-order approximation of P(|xi_s| >= x); an upper bound for the non-symmetric 1-stable case."""
    if not (x > 0 and s > 0):
        raise ValueError(f"Need x > 0 and s > 0, got x={x}, s={s}")
    dominant = spec.dominant() if isinstance(spec, CompositeSum) else spec
    if isinstance(dominant, NonSymmetricOneStable) and not isinstance(spec, CompositeSum):
        skew = dominant.c1 - dominant.c2
        log_x = math.log(x)
        integral, _ = quad(lambda th: (dominant.a - math.log(th) + log_x) ** 2 * th**2, 0.0, 2.0)
        bound = math.pi * (dominant.c1 + dominant.c2) * s / x + skew**2 * s**2 * integral / x**2
        return TailApproximation(bound, is_bound=True)
    scale = tail_scale(spec)
    return TailApproximation(scale.total / scale.alpha * s * x ** (-scale.alpha))


def empirical_tail(samples: np.ndarray, xs: Sequence[float]) -> np.ndarray:
    """P(|X| > x) for every x, from a sample."""
    magnitudes = np.sort(np.abs(np.asarray(samples, dtype=float)))
    n = magnitudes.size
    return 1.0 - np.searchsorted(magnitudes, np.asarray(xs, dtype=float), side="right") / n


def fit_tail_constant(samples_by_s: Dict[float, np.ndarray], xs: Sequence[float], alpha: float) -> Dict[float, float]:
    """Smallest c0 with P(|xi_s| > x) <= c0 s x^-alpha on the probed x, fitted separately for each s."""
    fitted = {}
    xs = np.asarray(xs, dtype=float)
    for s, samples in sorted(samples_by_s.items()):
        tail = empirical_tail(samples, xs)
        fitted[s] = float(np.max(tail * xs**alpha / s))
    return fitted


def vague_check(
    spec: MotionSpec,
    scale: TailScale,
    lam: float,
    t: float,
    s: float,
    lo: float,
    hi: float,
    n: int,
    rng: RandomStream,
) -> Dict[str, Estimate]:
    """Compare e^{lam t} P(xi_s / h_t in [lo, hi]) with s v_alpha([lo, hi])."""
    h = compute_h(lam, scale, t)
    draws = sample_increment(spec, s, rng, size=n) / h
    hits = int(np.count_nonzero((draws >= lo) & (draws <= hi)))
    p = Estimate.proportion(hits, n)
    weight = math.exp(lam * t)
    return {
        "empirical": Estimate(weight * p.value, weight * p.half_width),
        "target": Estimate.exact(s * v_alpha_interval(scale, lo, hi)),
    }

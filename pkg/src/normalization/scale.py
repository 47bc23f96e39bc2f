import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Tuple, Union

import numpy as np
from scipy.optimize import brentq
from scipy.special import gamma

from ..errors import BracketError, InvalidSpecError

logger = logging.getLogger(__name__)

NEGATIVE_Q_TOLERANCE = 1e-12


@dataclass(frozen=True)
class ConstantOne:
    kind = "one"

    def __call__(self, x):
        return np.ones_like(np.asarray(x, dtype=float))

    def log(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class LogType:
    """L(x) = log(e + x) ** power."""

    power: float = 1.0
    kind = "log"

    def __post_init__(self):
        if not self.power > 0:
            raise InvalidSpecError(f"Log-type slowly varying factor needs power > 0, got {self.power}")

    def __call__(self, x):
        return np.exp(self.log(x))

    def log(self, x):
        return self.power * np.log(np.log(math.e + np.asarray(x, dtype=float)))


SlowlyVarying = Union[ConstantOne, LogType]


@dataclass(frozen=True)
class TailScale:
    alpha: float
    q1: float
    q2: float
    slowly_varying: SlowlyVarying = field(default_factory=ConstantOne)

    def __post_init__(self):
        if not 0 < self.alpha < 2:
            raise InvalidSpecError(f"Tail index must lie in (0, 2), got {self.alpha}")
        if self.q1 < 0 or self.q2 < 0 or self.q1 + self.q2 <= 0:
            raise InvalidSpecError(f"Need q1, q2 >= 0 with q1 + q2 > 0, got ({self.q1}, {self.q2})")

    @property
    def total(self) -> float:
        return self.q1 + self.q2

    def log_g(self, x):
        """log of g(x) = x^-alpha L(x)."""
        x = np.asarray(x, dtype=float)
        return -self.alpha * np.log(x) + self.slowly_varying.log(x)


def compute_h(lam: float, scale: TailScale, t: float) -> float:
    """Normalizing scale h_t = inf{x > 0 : x^-alpha L(x) <= exp(-lam t)}."""
    if t < 0:
        raise ValueError(f"Time must be nonnegative, got {t}")
    if isinstance(scale.slowly_varying, ConstantOne):
        return math.exp(lam * t / scale.alpha)

    target = -lam * t
    guess = math.exp(lam * t / scale.alpha)
    lo, hi = guess, guess
    for _ in range(400):
        if scale.log_g(hi) <= target:
            break
        hi *= 2.0
    else:
        raise BracketError(f"Could not find an upper bracket for h_t at t={t}")
    for _ in range(400):
        if scale.log_g(lo) > target:
            break
        lo /= 2.0
    else:
        raise BracketError(f"Could not find a lower bracket for h_t at t={t}")

    grid = np.geomspace(lo, hi, 64)
    if np.any(np.diff(scale.log_g(grid)) > 1e-12):
        raise BracketError(
            f"x^-alpha L(x) is not decreasing on [{lo:.6g}, {hi:.6g}]; h_t is not well defined there"
        )

    log_root = brentq(
        lambda u: float(scale.log_g(math.exp(u))) - target,
        math.log(lo),
        math.log(hi),
        xtol=1e-13,
        rtol=4 * np.finfo(float).eps,
        maxiter=500,
    )
    return math.exp(log_root)


def stable_constant(alpha: float) -> float:
    """Gamma(1 - alpha) / alpha: int_0^inf (1 - e^{i theta x}) x^{-1-alpha} dx = stable_constant e^{-i pi alpha/2} theta^alpha."""
    return gamma(1.0 - alpha) / alpha


def forward_c_star(q1: float, q2: float, alpha: float) -> complex:
    """c_* = Gamma(1-alpha)/alpha (q1 e^{-i pi alpha/2} + q2 e^{i pi alpha/2}); alpha = 1 gives pi q."""
    if alpha == 1:
        return complex(math.pi * q1, 0.0)
    k = stable_constant(alpha)
    phase = math.pi * alpha / 2
    return complex(
        k * (q1 + q2) * math.cos(phase),
        k * (q2 - q1) * math.sin(phase),
    )


def solve_q(c_star: complex, alpha: float) -> Tuple[float, float]:
    if not 0 < alpha < 2:
        raise InvalidSpecError(f"Tail index must lie in (0, 2), got {alpha}")
    c_star = complex(c_star)
    if alpha == 1:
        q = c_star.real / math.pi
        if q <= 0:
            raise InvalidSpecError(f"Re(c_*) must be positive, got {c_star.real}")
        return q, q

    k = stable_constant(alpha)
    phase = math.pi * alpha / 2
    total = c_star.real / (k * math.cos(phase))
    difference = c_star.imag / (k * math.sin(phase))
    q1 = (total - difference) / 2
    q2 = (total + difference) / 2
    if q1 < -NEGATIVE_Q_TOLERANCE or q2 < -NEGATIVE_Q_TOLERANCE:
        raise InvalidSpecError(f"c_*={c_star} gives negative weights ({q1}, {q2}) for alpha={alpha}")
    if q1 < 0 or q2 < 0:
        logger.warning(f"Clamping tiny negative q values ({q1:.3e}, {q2:.3e}) to zero")
    return max(q1, 0.0), max(q2, 0.0)


def _tail_mass(weight: float, alpha: float, a: float) -> float:
    if math.isinf(a):
        return 0.0
    return weight * a ** (-alpha) / alpha


def v_alpha_interval(scale: TailScale, lo: float, hi: float) -> float:
    """v_alpha([lo, hi]) for an interval of the extended line whose closure avoids 0."""
    if not lo < hi:
        raise InvalidSpecError(f"Empty or reversed interval [{lo}, {hi}]")
    if lo > 0:
        return _tail_mass(scale.q1, scale.alpha, lo) - _tail_mass(scale.q1, scale.alpha, hi)
    if hi < 0:
        return _tail_mass(scale.q2, scale.alpha, -hi) - _tail_mass(scale.q2, scale.alpha, -lo)
    raise InvalidSpecError(f"Interval [{lo}, {hi}] touches 0, where v_alpha has infinite mass")


def v_alpha_union(scale: TailScale, intervals: Iterable[Tuple[float, float]]) -> float:
    """Mass of a finite union of pairwise disjoint intervals."""
    return sum(v_alpha_interval(scale, lo, hi) for lo, hi in intervals)

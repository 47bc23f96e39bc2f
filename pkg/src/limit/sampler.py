"""The limiting cluster process N_inf = sum_j T_j delta_{e_j}.

Given W, the locations e_j form a Poisson process with intensity
vartheta W v_alpha(dx) and the cluster sizes T_j are i.i.d. On the positive
half-line the variable y = x^-alpha turns that process into a homogeneous one
of rate vartheta W q1 / alpha, which is what the order-statistic fill-in below
the truncation uses.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Tuple

import numpy as np
from scipy.integrate import quad

from ..branching import LimitSpec, simulate_population
from ..errors import InvalidSpecError
from ..normalization import v_alpha_interval
from ..rng import RandomStream
from ..tree import PointMeasure, TestFunction, order_statistics
from ..verify import Z_95, Estimate

logger = logging.getLogger(__name__)

LAPLACE_MODES = ("yule-quadrature", "nested-mc")
MIXTURE_CHUNK = 256


def _draw_w(spec: LimitSpec, rng: RandomStream, on_survival: bool) -> float:
    sampler = spec.conditioned_w_sampler if on_survival else spec.w_sampler
    return float(sampler(rng, 1)[0])


def _sample(spec: LimitSpec, a: float, rng: RandomStream, on_survival: bool) -> Tuple[PointMeasure, float]:
    if not a > 0:
        raise InvalidSpecError(f"Truncation must be positive, got {a}")
    w = _draw_w(spec, rng, on_survival)
    if w <= 0:
        return PointMeasure.empty(), w
    total = spec.q1 + spec.q2
    count = rng.poisson(spec.theta * w * total * a ** (-spec.alpha) / spec.alpha)
    if count == 0:
        return PointMeasure.empty(), w
    positive = rng.random(count) < spec.q1 / total
    magnitude = a * (1.0 - rng.random(count)) ** (-1.0 / spec.alpha)
    locations = np.where(positive, magnitude, -magnitude)
    return PointMeasure(locations, spec.t_sampler(rng, count)), w


def sample_limit_process(spec: LimitSpec, a: float, rng: RandomStream, on_survival: bool = False) -> PointMeasure:
    """N_inf restricted to |x| >= a."""
    return _sample(spec, a, rng, on_survival)[0]


def sample_limit_order_statistics(
    spec: LimitSpec, a: float, n: int, rng: RandomStream, on_survival: bool = True
) -> np.ndarray:
    """The n largest atoms of N_inf counted with multiplicity.

    Ranks not covered by atoms above ``a`` are completed exactly with the
    positive atoms below ``a``, drawn in decreasing order.
    """
    measure, w = _sample(spec, a, rng, on_survival)
    top = order_statistics(measure, n)
    above = top[top >= a]
    if above.size == n or w <= 0 or spec.q1 == 0:
        return top
    rate = spec.theta * w * spec.q1 / spec.alpha
    filled = list(above)
    y = a ** (-spec.alpha)
    while len(filled) < n:
        y += rng.standard_exponential() / rate
        location = y ** (-1.0 / spec.alpha)
        size = int(spec.t_sampler(rng, 1)[0])
        filled.extend([location] * min(size, n - len(filled)))
    return np.array(filled)


def _exponent_mixture(spec: LimitSpec, mu: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """E* e^{-mu W} and E* mu W e^{-mu W} under the law of W given survival."""
    if spec.exponential_survival_w:
        return 1.0 / (1.0 + mu), mu / (1.0 + mu) ** 2
    if spec.survival_w_sample is None:
        raise InvalidSpecError("This limit spec carries no sample of W given survival")
    w = np.asarray(spec.survival_w_sample)
    mu = np.asarray(mu, dtype=float)
    none_above, one_above = np.empty(mu.shape), np.empty(mu.shape)
    for start in range(0, mu.size, MIXTURE_CHUNK):
        exposure = np.multiply.outer(mu[start : start + MIXTURE_CHUNK], w)
        weights = np.exp(-exposure)
        none_above[start : start + MIXTURE_CHUNK] = weights.mean(axis=-1)
        one_above[start : start + MIXTURE_CHUNK] = (weights * exposure).mean(axis=-1)
    return none_above, one_above


def _side_cdf(spec: LimitSpec, q: float, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape)
    positive = x > 0
    if np.any(positive):
        mu = q * spec.theta * x[positive] ** (-spec.alpha) / spec.alpha
        out[positive] = _exponent_mixture(spec, mu)[0]
    return out


def max_law_cdf(spec: LimitSpec, x):
    """P*(M_(1) <= x) = E* exp(-q1 vartheta W x^-alpha / alpha) for x > 0, else 0."""
    out = _side_cdf(spec, spec.q1, x)
    return float(out) if np.ndim(x) == 0 else out


def leftmost_law_sf(spec: LimitSpec, x):
    """P*(leftmost >= -x) = E* exp(-q2 vartheta W x^-alpha / alpha) for x > 0, else 0."""
    out = _side_cdf(spec, spec.q2, x)
    return float(out) if np.ndim(x) == 0 else out


def second_order_curve(spec: LimitSpec, x) -> np.ndarray:
    """P*(M_(2) <= x) = E*[e^{-mu W} (1 + mu W P(T = 1))] evaluated on an array."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros(x.shape)
    positive = x > 0
    if np.any(positive):
        mu = spec.q1 * spec.theta * x[positive] ** (-spec.alpha) / spec.alpha
        none_above, one_above = _exponent_mixture(spec, mu)
        out[positive] = none_above + spec.singleton.value * one_above
    return out


def second_order_cdf(spec: LimitSpec, x: float) -> Estimate:
    """P*(M_(2) <= x) with the uncertainty of P(T = 1) carried through."""
    if x <= 0:
        return Estimate.exact(0.0)
    mu = np.array([spec.q1 * spec.theta * x ** (-spec.alpha) / spec.alpha])
    none_above, one_above = _exponent_mixture(spec, mu)
    value = float(none_above[0] + spec.singleton.value * one_above[0])
    return Estimate(value, float(one_above[0]) * spec.singleton.half_width)


def cluster_laplace(theta):
    """1 - E e^{-theta T} for the Yule cluster law, -(1 - z) log(1 - z) / z with z = e^-theta."""
    theta = np.asarray(theta, dtype=float)
    w = -np.expm1(-theta)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(w >= 1.0, 1.0, -w * np.log(np.where(w > 0, w, 1.0)) / (1.0 - w))
    out = np.where(w <= 0, 0.0, out)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class LaplaceLimit:
    estimate: Estimate
    exponent: Estimate
    within_tolerance: bool = True

    @property
    def value(self) -> float:
        return self.estimate.value


def _pieces(g: TestFunction) -> Iterable[Tuple[float, float]]:
    """Finite intervals between consecutive knots where g can be positive, excluding the hole."""
    knots, values = g.knots, g.values
    for (a, va), (b, vb) in zip(zip(knots, values), zip(knots[1:], values[1:])):
        if max(va, vb) > 0:
            yield a, b


def _yule_exponent(spec: LimitSpec, g: TestFunction) -> Estimate:
    """Phi(g) = int e^{-lam r} int E(1 - e^{-Z_r g(x)}) v_alpha(dx) dr with Z_r geometric.

    With u = e^{-beta r} the r-integral becomes int_0^1 (1 - z) / (1 - z + u z) du / beta, z = e^{-g(x)}.
    """
    beta = spec.lam

    def inner(x: float) -> Tuple[float, float]:
        z = math.exp(-float(g(x)))
        if z >= 1.0:
            return 0.0, 0.0
        value, error = quad(lambda u: (1.0 - z) / (1.0 - z + u * z), 0.0, 1.0, epsabs=1e-13, epsrel=1e-11)
        return value / beta, error / beta

    def density(x: float) -> float:
        weight = spec.q1 if x > 0 else spec.q2
        return weight * abs(x) ** (-1.0 - spec.alpha)

    total, error = 0.0, 0.0
    for a, b in _pieces(g):
        value, err = quad(lambda x: inner(x)[0] * density(x), a, b, epsabs=1e-12, epsrel=1e-10, limit=200)
        total += value
        error += err
    scale = spec.scale
    if g.values[-1] > 0:
        end = g.knots[-1]
        value, err = inner(end)
        total += value * v_alpha_interval(scale, end, math.inf)
        error += err
    if g.values[0] > 0:
        end = g.knots[0]
        value, err = inner(end)
        total += value * v_alpha_interval(scale, -math.inf, end)
        error += err
    return Estimate(total, Z_95 * error)


def _nested_exponent(spec: LimitSpec, g: TestFunction, n_inner: int, rng: RandomStream) -> Estimate:
    """Phi(g) = (V / lam) E[1 - e^{-Z_R g(X)}], R ~ Exp(lam), X ~ v_alpha normalized on the annulus of g."""
    inner_radius, outer_radius = g.support
    lam = spec.lam
    if not lam > 0:
        raise InvalidSpecError("Nested Monte Carlo needs the Malthusian parameter on the limit spec")
    mass_pos = v_alpha_interval(spec.scale, inner_radius, outer_radius) if spec.q1 > 0 else 0.0
    mass_neg = v_alpha_interval(spec.scale, -outer_radius, -inner_radius) if spec.q2 > 0 else 0.0
    volume = mass_pos + mass_neg
    lo, hi = inner_radius ** (-spec.alpha), outer_radius ** (-spec.alpha)
    y = lo - (lo - hi) * rng.random(n_inner)
    magnitude = y ** (-1.0 / spec.alpha)
    positive = rng.random(n_inner) < mass_pos / volume
    x = np.where(positive, magnitude, -magnitude)
    r = rng.exponential(1.0 / lam, n_inner)
    if spec.is_yule:
        z = rng.geometric(np.exp(-lam * r))
    elif spec.branching is not None:
        z = np.array([simulate_population(spec.branching, float(ri), rng) for ri in r])
    else:
        raise InvalidSpecError("Nested Monte Carlo needs the branching configuration on the limit spec")
    contributions = (volume / lam) * -np.expm1(-z * g(x))
    return Estimate.from_samples(contributions)


def laplace_limit(
    spec: LimitSpec,
    g: TestFunction,
    mode: str = "yule-quadrature",
    n_outer: int = 10_000,
    n_inner: int = 100_000,
    rng: Optional[RandomStream] = None,
    tolerance: Optional[float] = None,
) -> LaplaceLimit:
    """E exp(-N_inf(g)) = E exp(-W Phi(g))."""
    if mode not in LAPLACE_MODES:
        raise ValueError(f"Unknown mode {mode!r}; expected one of {LAPLACE_MODES}")
    if g.is_zero:
        return LaplaceLimit(Estimate.exact(1.0), Estimate.exact(0.0))
    if mode == "yule-quadrature":
        if not spec.is_yule:
            raise InvalidSpecError("Yule quadrature needs the binary splitting law p2 = 1")
        exponent = _yule_exponent(spec, g)
        # W ~ Exp(1): E e^{-W Phi} = 1 / (1 + Phi).
        value = 1.0 / (1.0 + exponent.value)
        estimate = Estimate(value, value**2 * exponent.half_width)
    else:
        if rng is None:
            raise ValueError("Nested Monte Carlo needs a random stream")
        exponent = _nested_exponent(spec, g, n_inner, rng)
        w = spec.w_sampler(rng, n_outer)
        outer = np.exp(-w * exponent.value)
        slope = float(np.mean(w * outer))
        spread = Estimate.from_samples(outer)
        half_width = math.hypot(spread.half_width, slope * exponent.half_width)
        estimate = Estimate(spread.value, half_width)
    within = tolerance is None or estimate.half_width <= tolerance
    if not within:
        logger.warning(
            f"Laplace limit CI half-width {estimate.half_width:.3g} exceeds the requested tolerance {tolerance:.3g}"
        )
    return LaplaceLimit(estimate, exponent, within)


def default_truncation(test_functions: Iterable[TestFunction] = (), points: Iterable[float] = ()) -> float:
    """Half the smallest |x| any test function or CDF evaluation looks at."""
    radii = [g.hole_radius for g in test_functions if not g.is_zero]
    radii.extend(abs(x) for x in points if x != 0)
    if not radii:
        raise ValueError("No test function or evaluation point to derive a truncation from")
    return 0.5 * min(radii)


def mean_count_above(spec: LimitSpec, x: float, mean_w: float = 1.0) -> float:
    """Expected number of atoms above x > 0: vartheta E[W] q1 x^-alpha / alpha (clusters, not mass)."""
    return spec.theta * mean_w * spec.q1 * x ** (-spec.alpha) / spec.alpha

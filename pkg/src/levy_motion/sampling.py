"""Exact samplers for the admitted motions.

Stable laws use the Chambers-Mallows-Stuck transform of a uniform angle V on
(-pi/2, pi/2) and an independent Exp(1) variable W, in the S1 parameterization

    E exp(i theta X) = exp(-sigma^alpha |theta|^alpha (1 - i beta sign(theta) tan(pi alpha/2)))   (alpha != 1)
    E exp(i theta X) = exp(-sigma |theta| (1 + i beta (2/pi) sign(theta) log|theta|) + i mu theta)  (alpha == 1)

Matching against the exponent of the Levy measure (c1, c2) gives
beta = (c1 - c2)/(c1 + c2) and
sigma^alpha = Gamma(1 - alpha) / alpha (c1 + c2) cos(pi alpha / 2) for alpha != 1,
sigma = pi (c1 + c2) / 2 and mu = a (c1 - c2) for the non-symmetric 1-stable case.
"""
import math

import numpy as np

from ..errors import InvalidSpecError
from ..rng import RandomStream
from .spec import BrownianComponent, CompositeSum, MotionSpec, NonSymmetricOneStable, StrictlyStable


def standard_stable(alpha: float, skew: float, size: int, rng: RandomStream) -> np.ndarray:
    """S1(alpha, skew, scale 1, location 0) variates for alpha != 1."""
    v = rng.uniform(-math.pi / 2, math.pi / 2, size)
    w = rng.standard_exponential(size)
    zeta = skew * math.tan(math.pi * alpha / 2)
    shift = math.atan(zeta) / alpha
    factor = (1.0 + zeta**2) ** (1.0 / (2.0 * alpha))
    return (
        factor
        * np.sin(alpha * (v + shift))
        / np.cos(v) ** (1.0 / alpha)
        * (np.cos(v - alpha * (v + shift)) / w) ** ((1.0 - alpha) / alpha)
    )


def standard_one_stable(skew: float, size: int, rng: RandomStream) -> np.ndarray:
    """S1(1, skew, 1, 0) variates."""
    v = rng.uniform(-math.pi / 2, math.pi / 2, size)
    w = rng.standard_exponential(size)
    half_pi = math.pi / 2
    tilted = half_pi + skew * v
    return (2.0 / math.pi) * (tilted * np.tan(v) - skew * np.log(half_pi * w * np.cos(v) / tilted))


def _sample_positive(spec: MotionSpec, s: np.ndarray, rng: RandomStream) -> np.ndarray:
    n = s.size
    if isinstance(spec, StrictlyStable):
        if spec.alpha == 1:
            return s * (spec.scale * np.tan(rng.uniform(-math.pi / 2, math.pi / 2, n)) + spec.a)
        return s ** (1.0 / spec.alpha) * spec.scale * standard_stable(spec.alpha, spec.skewness, n, rng)
    if isinstance(spec, NonSymmetricOneStable):
        sigma = s * spec.scale
        mu = s * spec.a * (spec.c1 - spec.c2)
        x = standard_one_stable(spec.skewness, n, rng)
        return sigma * x + (2.0 / math.pi) * spec.skewness * sigma * np.log(sigma) + mu
    if isinstance(spec, BrownianComponent):
        return rng.normal(0.0, 1.0, n) * np.sqrt(2.0 * spec.b**2 * s)
    if isinstance(spec, CompositeSum):
        total = np.zeros(n)
        for component in spec.components:
            total += _sample_positive(component, s, rng)
        return total
    raise InvalidSpecError(f"Unknown motion {type(spec).__name__}")


def sample_increment(spec: MotionSpec, s, rng: RandomStream, size=None):
    """Draw xi_s for a duration s (scalar or array of durations).

    Zero durations give exactly 0 and consume no randomness.
    """
    durations = np.asarray(s, dtype=float)
    if np.any(durations < 0):
        raise ValueError("Durations must be nonnegative")
    if size is not None:
        durations = np.broadcast_to(durations, (size,) if np.isscalar(size) else size)
    flat = np.ravel(durations)
    out = np.zeros(flat.shape)
    active = flat > 0
    if np.any(active):
        out[active] = _sample_positive(spec, flat[active], rng)
    if durations.ndim == 0:
        return float(out[0])
    return out.reshape(durations.shape)

import logging
import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
from numpy.polynomial import polynomial

from ..errors import InvalidSpecError
from ..rng import RandomStream

logger = logging.getLogger(__name__)

MAX_SUPPORT = 64
DEFAULT_POPULATION_CAP = 10**8


@dataclass(frozen=True)
class OffspringLaw:
    probabilities: Tuple[float, ...]

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probabilities)
        object.__setattr__(self, "probabilities", probs)
        if not probs or len(probs) > MAX_SUPPORT + 1:
            raise InvalidSpecError(f"Offspring law needs support within 0..{MAX_SUPPORT}")
        if any(p < 0 for p in probs):
            raise InvalidSpecError("Offspring probabilities must be nonnegative")
        if abs(sum(probs) - 1.0) > 1e-9:
            raise InvalidSpecError(f"Offspring probabilities sum to {sum(probs)}, not 1")
        if self.mean <= 1:
            raise InvalidSpecError(f"Offspring mean {self.mean} is not supercritical")

    @property
    def mean(self) -> float:
        return float(sum(k * p for k, p in enumerate(self.probabilities)))

    @property
    def p0(self) -> float:
        return self.probabilities[0]

    @property
    def is_yule(self) -> bool:
        return len(self.probabilities) > 2 and self.probabilities[2] == 1.0

    def generating_function(self, s):
        return polynomial.polyval(s, self.probabilities)

    def sample(self, rng: RandomStream, size: int) -> np.ndarray:
        """Offspring counts for ``size`` splitting individuals."""
        if size == 0:
            return np.zeros(0, dtype=np.int64)
        support = np.flatnonzero(np.asarray(self.probabilities) > 0)
        if support.size == 1:
            return np.full(size, support[0], dtype=np.int64)
        return rng.choice(len(self.probabilities), size=size, p=self.probabilities).astype(np.int64)


@dataclass(frozen=True)
class BranchingConfig:
    offspring: OffspringLaw
    beta: float
    population_cap: int = field(default=DEFAULT_POPULATION_CAP)

    def __post_init__(self):
        if not self.beta > 0 or not math.isfinite(self.beta):
            raise InvalidSpecError(f"Branching rate beta must be positive, got {self.beta}")
        if self.population_cap < 1:
            raise InvalidSpecError("Population cap must be positive")

    @property
    def lam(self) -> float:
        """Malthusian parameter beta (m - 1)."""
        return self.beta * (self.offspring.mean - 1.0)

    @property
    def is_yule(self) -> bool:
        return self.offspring.is_yule


def extinction_probability(offspring: OffspringLaw, tolerance: float = 1e-12, max_iterations: int = 10_000_000) -> float:
    """Smallest fixed point in [0, 1) of the generating function.

    Monotone iteration s <- f(s) from 0. When p0 == 0 the answer is 0, which lies
    outside the open interval (0, 1) quoted in the literature.
    """
    if offspring.p0 == 0:
        return 0.0
    s = 0.0
    for _ in range(max_iterations):
        nxt = float(offspring.generating_function(s))
        if abs(nxt - s) < tolerance:
            return nxt
        s = nxt
    logger.warning(f"Fixed-point iteration stopped after {max_iterations} steps at s={s}")
    return s

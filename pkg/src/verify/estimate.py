import math
from dataclasses import dataclass

import numpy as np

Z_95 = 1.959963984540054


@dataclass(frozen=True)
class Estimate:
    """A point estimate with the half-width of its 95% confidence interval."""

    value: float
    half_width: float = 0.0

    @property
    def lower(self) -> float:
        return self.value - self.half_width

    @property
    def upper(self) -> float:
        return self.value + self.half_width

    @property
    def standard_error(self) -> float:
        return self.half_width / Z_95

    def contains(self, x: float) -> bool:
        return self.lower <= x <= self.upper

    def overlaps(self, other: "Estimate") -> bool:
        return self.lower <= other.upper and other.lower <= self.upper

    def within(self, target: float, standard_errors: float) -> bool:
        return abs(self.value - target) <= standard_errors * self.standard_error

    @classmethod
    def exact(cls, value: float) -> "Estimate":
        return cls(float(value), 0.0)

    @classmethod
    def from_samples(cls, values) -> "Estimate":
        values = np.asarray(values, dtype=float)
        n = values.size
        if n == 0:
            raise ValueError("Cannot estimate a mean from zero samples")
        mean = float(values.mean())
        if n == 1:
            return cls(mean, math.inf)
        return cls(mean, Z_95 * float(values.std(ddof=1)) / math.sqrt(n))

    @classmethod
    def proportion(cls, successes: int, n: int) -> "Estimate":
        if n <= 0:
            raise ValueError("Cannot estimate a proportion from zero trials")
        p = successes / n
        return cls(p, Z_95 * math.sqrt(p * (1 - p) / n))

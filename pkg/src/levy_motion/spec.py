import math
from dataclasses import dataclass
from typing import Tuple, Union

from ..errors import InvalidSpecError
from ..normalization import TailScale, solve_q, stable_constant


@dataclass(frozen=True)
class StrictlyStable:
    """Strictly alpha-stable motion with Levy measure c1 x^{-1-alpha} dx on (0, inf) and c2 |x|^{-1-alpha} dx on (-inf, 0).

    The drift ``a`` only enters when alpha == 1, which also requires c1 == c2.
    """

    alpha: float
    c1: float
    c2: float
    a: float = 0.0

    def __post_init__(self):
        if not 0 < self.alpha < 2:
            raise InvalidSpecError(f"Stability index must lie in (0, 2), got {self.alpha}")
        if self.c1 < 0 or self.c2 < 0 or self.c1 + self.c2 <= 0:
            raise InvalidSpecError(f"Need c1, c2 >= 0 with c1 + c2 > 0, got ({self.c1}, {self.c2})")
        if self.alpha == 1 and self.c1 != self.c2:
            raise InvalidSpecError(
                "A 1-stable motion with c1 != c2 must be declared as NonSymmetricOneStable"
            )
        if self.alpha != 1 and self.a != 0:
            raise InvalidSpecError("Drift is only admitted for alpha == 1")

    @property
    def skewness(self) -> float:
        return (self.c1 - self.c2) / (self.c1 + self.c2)

    @property
    def scale(self) -> float:
        """sigma of the S1 parameterization at unit time."""
        if self.alpha == 1:
            return math.pi * self.c1
        sigma_alpha = stable_constant(self.alpha) * (self.c1 + self.c2) * math.cos(math.pi * self.alpha / 2)
        return sigma_alpha ** (1.0 / self.alpha)


@dataclass(frozen=True)
class NonSymmetricOneStable:
    c1: float
    c2: float
    a: float = 0.0

    def __post_init__(self):
        if self.c1 < 0 or self.c2 < 0 or self.c1 + self.c2 <= 0:
            raise InvalidSpecError(f"Need c1, c2 >= 0 with c1 + c2 > 0, got ({self.c1}, {self.c2})")
        if self.c1 == self.c2:
            raise InvalidSpecError("c1 == c2 is a symmetric 1-stable motion; use StrictlyStable(alpha=1)")

    @property
    def alpha(self) -> float:
        return 1.0

    @property
    def skewness(self) -> float:
        return (self.c1 - self.c2) / (self.c1 + self.c2)

    @property
    def scale(self) -> float:
        return math.pi * (self.c1 + self.c2) / 2


@dataclass(frozen=True)
class BrownianComponent:
    """Gaussian member of a composite motion with exponent -b^2 theta^2."""

    b: float

    def __post_init__(self):
        if self.b < 0:
            raise InvalidSpecError(f"Brownian coefficient must be nonnegative, got {self.b}")


@dataclass(frozen=True)
class CompositeSum:
    components: Tuple["MotionSpec", ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise InvalidSpecError("A composite motion needs at least one component")
        jumps = [c for c in self.flatten() if not isinstance(c, BrownianComponent)]
        if not jumps:
            raise InvalidSpecError("A composite motion needs at least one stable component to fix the tail index")
        smallest = min(c.alpha for c in jumps)
        if sum(1 for c in jumps if c.alpha == smallest) != 1:
            raise InvalidSpecError(f"Exactly one component may attain the minimal index {smallest}")

    def flatten(self) -> Tuple["MotionSpec", ...]:
        flat = []
        for component in self.components:
            if isinstance(component, CompositeSum):
                flat.extend(component.flatten())
            else:
                flat.append(component)
        return tuple(flat)

    def dominant(self) -> Union[StrictlyStable, NonSymmetricOneStable]:
        jumps = [c for c in self.flatten() if not isinstance(c, BrownianComponent)]
        return min(jumps, key=lambda c: c.alpha)

    @property
    def alpha(self) -> float:
        return self.dominant().alpha


MotionSpec = Union[StrictlyStable, NonSymmetricOneStable, BrownianComponent, CompositeSum]


def tail_index(spec: MotionSpec) -> float:
    if isinstance(spec, BrownianComponent):
        raise InvalidSpecError("A Brownian motion alone has no regularly varying tail")
    return spec.alpha


def c_star(spec: MotionSpec) -> complex:
    """The constant c_* with psi(theta) ~ -c_* theta^alpha as theta -> 0+."""
    if isinstance(spec, CompositeSum):
        return c_star(spec.dominant())
    if isinstance(spec, NonSymmetricOneStable):
        return complex(0.0, spec.c1 - spec.c2)
    if isinstance(spec, StrictlyStable):
        if spec.alpha == 1:
            return complex(math.pi * spec.c1, -spec.a)
        k = stable_constant(spec.alpha)
        phase = math.pi * spec.alpha / 2
        return k * (spec.c1 * complex(math.cos(phase), -math.sin(phase)) + spec.c2 * complex(math.cos(phase), math.sin(phase)))
    raise InvalidSpecError(f"{type(spec).__name__} has no tail constant")


def tail_scale(spec: MotionSpec) -> TailScale:
    """(alpha, q1, q2) of the limit measure for the motion, with L == 1."""
    dominant = spec.dominant() if isinstance(spec, CompositeSum) else spec
    if isinstance(dominant, NonSymmetricOneStable):
        # psi is not regularly varying at 0 here; the limit measure is the Levy measure itself under h_t = e^{lambda t}.
        return TailScale(alpha=1.0, q1=dominant.c1, q2=dominant.c2)
    q1, q2 = solve_q(c_star(dominant), tail_index(dominant))
    return TailScale(alpha=dominant.alpha, q1=q1, q2=q2)

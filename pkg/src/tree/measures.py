import logging
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from ..errors import InvalidSpecError
from .simulator import ParticleTree, subtree_leaf_counts

logger = logging.getLogger(__name__)

ZERO_ATOM = 1e-300


def _punctured(locations: np.ndarray) -> np.ndarray:
    """Move atoms sitting exactly at 0 to +-1e-300, keeping the sign bit."""
    locations = np.array(locations, dtype=float)
    zero = locations == 0
    if np.any(zero):
        locations[zero] = np.where(np.signbit(locations[zero]), -ZERO_ATOM, ZERO_ATOM)
    return locations


@dataclass(frozen=True)
class PointMeasure:
    """Finite point measure on the punctured extended line."""

    locations: np.ndarray
    multiplicities: np.ndarray

    def __post_init__(self):
        locations = _punctured(np.ravel(self.locations))
        multiplicities = np.ravel(np.asarray(self.multiplicities, dtype=np.int64))
        if locations.shape != multiplicities.shape:
            raise InvalidSpecError("Every atom needs exactly one multiplicity")
        if np.any(multiplicities < 1):
            raise InvalidSpecError("Multiplicities must be positive integers")
        object.__setattr__(self, "locations", locations)
        object.__setattr__(self, "multiplicities", multiplicities)

    @classmethod
    def empty(cls) -> "PointMeasure":
        return cls(np.zeros(0), np.zeros(0, dtype=np.int64))

    @classmethod
    def unit_atoms(cls, locations) -> "PointMeasure":
        locations = np.ravel(np.asarray(locations, dtype=float))
        return cls(locations, np.ones(locations.size, dtype=np.int64))

    @property
    def atom_count(self) -> int:
        return int(self.locations.size)

    @property
    def mass(self) -> int:
        return int(self.multiplicities.sum())

    def evaluate(self, g) -> float:
        """N(g) = sum of multiplicity * g(location)."""
        if self.atom_count == 0:
            return 0.0
        return float(np.dot(self.multiplicities, g(self.locations)))

    def count_in(self, lo: float, hi: float) -> int:
        inside = (self.locations >= lo) & (self.locations <= hi)
        return int(self.multiplicities[inside].sum())

    def restrict(self, mask) -> "PointMeasure":
        mask = np.asarray(mask, dtype=bool)
        return PointMeasure(self.locations[mask], self.multiplicities[mask])


@dataclass(frozen=True)
class TestFunction:
    """Nonnegative piecewise-linear g on the extended line, zero on a hole around 0.

    ``knots`` are increasing; g is constant beyond the outermost knots, which
    also fixes its values at +-inf.
    """

    knots: Tuple[float, ...]
    values: Tuple[float, ...]

    __test__ = False

    def __post_init__(self):
        knots = tuple(float(x) for x in self.knots)
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "values", values)
        if not knots or len(knots) != len(values):
            raise InvalidSpecError("A test function needs matching knots and values")
        if any(b <= a for a, b in zip(knots, knots[1:])):
            raise InvalidSpecError("Test function knots must be strictly increasing")
        if any(not math.isfinite(x) for x in knots + values) or min(values) < 0:
            raise InvalidSpecError("Test function knots and values must be finite and values nonnegative")
        if self.hole_radius <= 0:
            raise InvalidSpecError("A test function must vanish on a neighbourhood of 0")

    @property
    def hole_radius(self) -> float:
        """Largest delta with g == 0 on (-delta, delta)."""
        x, v = self.knots, self.values
        distances = [math.inf]
        if v[0] > 0:
            distances.append(0.0 if x[0] >= 0 else -x[0])
        if v[-1] > 0:
            distances.append(0.0 if x[-1] <= 0 else x[-1])
        for (a, va), (b, vb) in zip(zip(x, v), zip(x[1:], v[1:])):
            if max(va, vb) > 0:
                distances.append(0.0 if a <= 0 <= b else min(abs(a), abs(b)))
        return min(distances)

    @property
    def sup(self) -> float:
        return max(self.values)

    @property
    def support(self) -> Tuple[float, float]:
        """(inner, outer) with g == 0 whenever |x| < inner or |x| > outer."""
        x, v = self.knots, self.values
        if self.is_zero:
            return (math.inf, 0.0)
        outer = math.inf if v[0] > 0 or v[-1] > 0 else max(abs(x[0]), abs(x[-1]))
        return (self.hole_radius, outer)

    @property
    def is_zero(self) -> bool:
        return self.sup == 0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.interp(x, self.knots, self.values)

    @classmethod
    def zero(cls) -> "TestFunction":
        return cls((1.0,), (0.0,))

    @classmethod
    def ramp(cls, start: float, width: float, height: float = 1.0) -> "TestFunction":
        """0 below ``start``, rising linearly to ``height`` over ``width``, then flat out to +inf.

        A negative ``start`` mirrors the ramp onto the negative half-line.
        """
        if start == 0 or width <= 0:
            raise InvalidSpecError("A ramp needs start != 0 and width > 0")
        if start > 0:
            return cls((start, start + width), (0.0, height))
        return cls((start - width, start), (height, 0.0))

    @classmethod
    def plateau(cls, lo: float, hi: float, height: float = 1.0, edge: float = None) -> "TestFunction":
        """Trapezoid supported on [lo, hi] (same sign) with linear edges of width ``edge``."""
        if lo * hi <= 0 or hi <= lo:
            raise InvalidSpecError("A plateau needs lo < hi on one side of 0")
        edge = edge if edge is not None else (hi - lo) / 4
        if not 0 < edge <= (hi - lo) / 2:
            raise InvalidSpecError("Plateau edge must lie in (0, (hi - lo) / 2]")
        return cls((lo, lo + edge, hi - edge, hi), (0.0, height, height, 0.0))

    @classmethod
    def tent(cls, lo: float, hi: float, height: float = 1.0) -> "TestFunction":
        if lo * hi <= 0 or hi <= lo:
            raise InvalidSpecError("A tent needs lo < hi on one side of 0")
        return cls((lo, 0.5 * (lo + hi), hi), (0.0, height, 0.0))


def extremal_measure(tree: ParticleTree, h: float) -> PointMeasure:
    """Atoms at h^-1 xi_t^v for every alive leaf v."""
    if not h > 0:
        raise ValueError(f"Scale h must be positive, got {h}")
    return PointMeasure.unit_atoms(tree.position[tree.alive] / h)


def _ancestral(tree: ParticleTree, h: float, keep: np.ndarray) -> PointMeasure:
    if not h > 0:
        raise ValueError(f"Scale h must be positive, got {h}")
    counts = subtree_leaf_counts(tree)
    keep = keep & (counts > 0)
    return PointMeasure(tree.increment[keep] / h, counts[keep])


def ancestral_measure(tree: ParticleTree, h: float) -> PointMeasure:
    """One atom h^-1 X_{u,t} per pair (alive leaf v, ancestor u of v).

    Every node u appears once, weighted by its number of alive descendant leaves.
    """
    return _ancestral(tree, h, np.ones(tree.size, dtype=bool))


def cut_measure(tree: ParticleTree, h: float, s: float) -> PointMeasure:
    """The ancestral measure restricted to ancestors born after t - s."""
    return _ancestral(tree, h, tree.birth > tree.t - s)


def order_statistics(measure: PointMeasure, n: int, descending: bool = True) -> np.ndarray:
    """The n largest atoms counted with multiplicity, padded with -inf.

    With ``descending=False`` the n smallest in increasing order, padded with +inf.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    pad = -math.inf if descending else math.inf
    out = np.full(n, pad)
    if measure.atom_count == 0 or n == 0:
        return out
    order = np.argsort(-measure.locations if descending else measure.locations, kind="stable")
    locations = measure.locations[order]
    cumulative = np.cumsum(measure.multiplicities[order])
    available = min(n, int(cumulative[-1]))
    ranks = np.arange(1, available + 1)
    out[:available] = locations[np.searchsorted(cumulative, ranks)]
    return out


def leaf_order_statistics(tree: ParticleTree, h: float, n: int, descending: bool = True) -> np.ndarray:
    return order_statistics(extremal_measure(tree, h), n, descending)


def direct_sum(tree: ParticleTree, h: float, g) -> float:
    """Sum over alive leaves of g(h^-1 xi_t^v), with xi_t^v summed along each ancestor chain."""
    return float(sum(float(g(tree.chain_sum(int(v)) / h)) for v in tree.leaves))


def as_test_functions(specs: Sequence[dict]) -> Tuple[TestFunction, ...]:
    """Build test functions from {'kind': 'ramp'|'plateau'|'tent'|'zero', ...} records."""
    built = []
    for spec in specs:
        params = dict(spec)
        kind = params.pop("kind")
        if kind == "zero":
            built.append(TestFunction.zero())
        elif kind in ("ramp", "plateau", "tent"):
            built.append(getattr(TestFunction, kind)(**params))
        else:
            raise InvalidSpecError(f"Unknown test function kind {kind!r}")
    return tuple(built)

import math

import numpy as np
import pytest

from src.branching import BranchingConfig, OffspringLaw
from src.errors import BracketError, InsufficientSamplesError, InvalidSpecError
from src.kpp import (
    MIN_TREES,
    FrontPoint,
    HardIndicator,
    Ramp,
    TreeBatch,
    ZeroFunction,
    estimate_u,
    front_band_check,
    front_position,
    front_speed,
    simulate_leaf_batch,
    u_from_batch,
)
from src.verify import Estimate


@pytest.fixture
def uniform_batch():
    """1000 single-leaf trees with leaves at 0, 0.001, ..., 0.999."""
    return TreeBatch.from_position_arrays(1.0, [np.array([i / 1000]) for i in range(MIN_TREES)])


def test_tree_batch_layout():
    batch = TreeBatch.from_position_arrays(2.0, [np.array([1.0, -3.0]), np.array([]), np.array([0.5])])

    assert batch.size == 3
    assert list(batch.offsets) == [0, 2, 2, 3]
    assert list(batch.rightmost()) == [1.0, -math.inf, 0.5]


def test_front_function_weights():
    batch = TreeBatch.from_position_arrays(2.0, [np.array([1.0, -3.0]), np.array([]), np.array([0.5])])

    ramp_weights = batch.weights(Ramp(0.0, 2.0, 1.0), 0.0)
    hard_weights = batch.weights(HardIndicator(0.75), 0.0)

    np.testing.assert_allclose(ramp_weights, [math.exp(-0.5), 1.0, math.exp(-0.25)])
    assert list(hard_weights) == [0.0, 1.0, 1.0]
    assert list(batch.weights(ZeroFunction(), 5.0)) == [1.0, 1.0, 1.0]


def test_ramp_validation():
    with pytest.raises(InvalidSpecError):
        Ramp(0.0, 0.0, 1.0)


def test_estimate_u_exact_cases(yule, stable15):
    g = Ramp(0.0, 1.0, 1.0)

    assert estimate_u(yule, stable15, g, 0.0, 0.5, MIN_TREES).value == pytest.approx(math.exp(-0.5))
    assert estimate_u(yule, stable15, ZeroFunction(), 3.0, 0.0, MIN_TREES) == Estimate.exact(1.0)


def test_estimate_u_needs_enough_trees(yule, stable15, rng):
    with pytest.raises(InsufficientSamplesError):
        estimate_u(yule, stable15, Ramp(), 1.0, 0.0, 10, rng=rng)
    with pytest.raises(InsufficientSamplesError):
        u_from_batch(TreeBatch.from_position_arrays(1.0, [np.zeros(1)] * 10), Ramp(), 0.0)


def test_estimate_u_on_simulated_trees(yule, stable15, rng):
    g = Ramp(0.0, 1.0, 1.0)
    batch = simulate_leaf_batch(yule, stable15, 1.0, MIN_TREES, rng)

    near = estimate_u(yule, stable15, g, 1.0, 0.0, MIN_TREES, batch=batch)
    far_left = estimate_u(yule, stable15, g, 1.0, -1e6, MIN_TREES, batch=batch)

    assert 0.0 < near.value < 1.0
    assert far_left.value > near.value
    assert far_left.value > 0.99


def test_front_position_on_known_profile(uniform_batch):
    # 1 - u(x) = P(leaf >= -x), the median level sits at x = -0.5
    point = front_position(None, None, HardIndicator(0.0), 1.0, 0.5, MIN_TREES, bracket=(-2.0, 0.0), batch=uniform_batch)

    assert point.x == pytest.approx(-0.5, abs=0.06)
    assert point.one_minus_u.contains(0.5) or point.x_half_width < 0.02 * abs(point.x)


def test_front_position_requires_bracket(uniform_batch):
    with pytest.raises(BracketError):
        front_position(None, None, HardIndicator(0.0), 1.0, 0.5, MIN_TREES, bracket=(-0.2, 0.0), batch=uniform_batch)
    with pytest.raises(ValueError):
        front_position(None, None, HardIndicator(0.0), 1.0, 1.5, MIN_TREES, batch=uniform_batch)


def test_front_speed_recovers_exponential_growth():
    lam, alpha = 1.0, 1.5
    trace = [
        FrontPoint(t, 0.5, -math.exp(lam * t / alpha + 0.3), Estimate(0.5, 0.01), 0.0) for t in (2.0, 4.0, 6.0)
    ]

    speed = front_speed(trace, lam, alpha)

    assert speed.slope == pytest.approx(lam / alpha)
    assert speed.relative_deviation == pytest.approx(0.0, abs=1e-9)


def test_band_check_preconditions(yule, binary_with_death, stable15):
    with pytest.raises(InvalidSpecError):
        front_band_check(binary_with_death, stable15, Ramp(), [1.0, 2.0, 3.0], 1.0, 0.3, MIN_TREES)
    with pytest.raises(InvalidSpecError):
        front_band_check(yule, stable15, Ramp(), [1.0, 2.0, 3.0], 0.5, 0.3, MIN_TREES)


def test_band_check_on_simulated_trees(stable15, make_rng):
    cfg = BranchingConfig(OffspringLaw((0.0, 0.0, 1.0)), beta=1.0)
    t_grid = (1.0, 2.0, 3.0)
    batches = {t: simulate_leaf_batch(cfg, stable15, t, MIN_TREES, make_rng(i, "band")) for i, t in enumerate(t_grid)}

    band = front_band_check(cfg, stable15, Ramp(), t_grid, 2.0, 0.2, MIN_TREES, tolerance=0.5, batches=batches)

    assert set(band.fast_grid) == set(t_grid)
    assert band.fast_grid[1.0][0] == pytest.approx(-math.exp(2.0))
    assert band.slow_grid[3.0][-1] == 0.0
    assert band.fast.rows[-1].value < 0.1


def test_u_is_monotone_in_x(yule, stable15, rng):
    # g nondecreasing makes x -> u_g(t, x) nonincreasing, pathwise on a shared batch
    g = Ramp(0.0, 1.0, 1.0)
    batch = simulate_leaf_batch(yule, stable15, 1.5, MIN_TREES, rng)

    values = [u_from_batch(batch, g, x).value for x in (-3.0, -1.0, -0.25, 0.0, 0.5, 2.0)]

    assert all(a >= b for a, b in zip(values, values[1:]))
    assert values[0] > values[-1]

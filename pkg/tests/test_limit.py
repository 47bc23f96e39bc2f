import math

import numpy as np
import pytest
from scipy.integrate import quad

from src.branching import ConstantW, LimitSpec, YuleClusterSize
from src.errors import InvalidSpecError
from src.limit import (
    cluster_laplace,
    default_truncation,
    laplace_limit,
    leftmost_law_sf,
    max_law_cdf,
    mean_count_above,
    sample_limit_order_statistics,
    sample_limit_process,
    second_order_cdf,
    second_order_curve,
)
from src.tree import TestFunction
from src.verify import Estimate, ks_distance, ks_pvalue


@pytest.fixture
def deterministic_w_limit():
    """W == 1 on survival: the max law is exp(-q1 theta x^-alpha / alpha)."""
    return LimitSpec(
        alpha=1.5,
        q1=1.0,
        q2=0.5,
        theta=1.0,
        w_sampler=ConstantW(1.0),
        t_sampler=YuleClusterSize(),
        lam=1.0,
        survival_w_sampler=ConstantW(1.0),
        survival_w_sample=np.ones(16),
    )


def test_max_law_closed_form(yule_limit):
    # mu = 1 * 1 * 1^-1.5 / 1.5 = 2/3
    assert max_law_cdf(yule_limit, 1.0) == pytest.approx(0.6)
    assert max_law_cdf(yule_limit, -1.0) == 0.0
    np.testing.assert_allclose(max_law_cdf(yule_limit, np.array([0.0, 1.0])), [0.0, 0.6])
    assert leftmost_law_sf(yule_limit, 1.0) == pytest.approx(0.6)


def test_second_order_closed_form(yule_limit):
    # 1/(1+mu) + P(T=1) mu/(1+mu)^2 with mu = 2/3
    expected = 0.6 + 0.5 * (2.0 / 3.0) / (5.0 / 3.0) ** 2

    assert second_order_curve(yule_limit, [1.0])[0] == pytest.approx(expected)
    estimate = second_order_cdf(yule_limit, 1.0)
    assert estimate.value == pytest.approx(expected)
    assert estimate.half_width == 0.0
    assert second_order_cdf(yule_limit, 0.0).value == 0.0


def test_mixture_path_uses_cached_w(deterministic_w_limit):
    assert max_law_cdf(deterministic_w_limit, 1.0) == pytest.approx(math.exp(-2.0 / 3.0))
    assert leftmost_law_sf(deterministic_w_limit, 1.0) == pytest.approx(math.exp(-1.0 / 3.0))


def test_limit_spec_rejects_theta_above_inverse_lambda():
    with pytest.raises(InvalidSpecError):
        LimitSpec(1.5, 1.0, 1.0, theta=2.0, w_sampler=ConstantW(1.0), t_sampler=YuleClusterSize(), lam=1.0)


def test_cluster_laplace_matches_series():
    theta = 0.3
    k = np.arange(1, 2_000_001, dtype=float)
    series = 1.0 - np.sum(np.exp(-theta * k) / (k * (k + 1.0)))

    assert cluster_laplace(theta) == pytest.approx(series, rel=1e-9)
    assert cluster_laplace(0.0) == 0.0
    assert cluster_laplace(np.inf) == 1.0


def test_atoms_above_x_have_poisson_mixture_mean(yule_limit, rng):
    n = 20_000
    counts = np.array([np.count_nonzero(sample_limit_process(yule_limit, 0.5, rng).locations >= 1.0) for _ in range(n)])

    estimate = Estimate.from_samples(counts)
    assert estimate.within(mean_count_above(yule_limit, 1.0), 4.0)


def test_truncation_must_be_positive(yule_limit, rng):
    with pytest.raises(InvalidSpecError):
        sample_limit_process(yule_limit, 0.0, rng)


def test_order_statistics_follow_their_limit_laws(yule_limit, rng):
    n = 5000
    tops = np.array([sample_limit_order_statistics(yule_limit, 0.2, 2, rng) for _ in range(n)])

    first = ks_distance(tops[:, 0], lambda x: max_law_cdf(yule_limit, x))
    second = ks_distance(tops[:, 1], lambda x: second_order_curve(yule_limit, x))

    assert np.all(tops[:, 0] >= tops[:, 1])
    assert ks_pvalue(first, n) > 0.001
    assert ks_pvalue(second, n) > 0.001


def test_yule_exponent_matches_cluster_transform(yule_limit):
    g = TestFunction.plateau(1.0, 3.0)

    result = laplace_limit(yule_limit, g)

    # Phi(g) = vartheta int cluster_laplace(g(x)) v_alpha(dx), vartheta = 1, q1 = 1
    expected, _ = quad(lambda x: cluster_laplace(float(g(x))) * x**-2.5, 1.0, 3.0, points=[1.5, 2.5], epsabs=1e-12)
    assert result.exponent.value == pytest.approx(expected, rel=1e-7)
    assert result.value == pytest.approx(1.0 / (1.0 + expected), rel=1e-7)


def test_yule_exponent_with_unbounded_support(yule_limit):
    g = TestFunction.ramp(1.0, 1.0, height=2.0)

    result = laplace_limit(yule_limit, g)

    ramp_part, _ = quad(lambda x: cluster_laplace(float(g(x))) * x**-2.5, 1.0, 2.0, epsabs=1e-12)
    tail_part = cluster_laplace(2.0) * 2.0**-1.5 / 1.5
    assert result.exponent.value == pytest.approx(ramp_part + tail_part, rel=1e-7)


def test_laplace_limit_of_zero_function(yule_limit):
    result = laplace_limit(yule_limit, TestFunction.zero())

    assert result.value == 1.0
    assert result.estimate.half_width == 0.0


def test_laplace_limit_against_simulated_process(yule_limit, rng):
    g = TestFunction.plateau(1.0, 3.0)
    target = laplace_limit(yule_limit, g)

    values = [math.exp(-sample_limit_process(yule_limit, 0.5, rng).evaluate(g)) for _ in range(20_000)]

    assert Estimate.from_samples(values).within(target.value, 4.0)


@pytest.mark.slow
def test_nested_monte_carlo_agrees_with_quadrature(yule_limit, rng):
    g = TestFunction.plateau(1.0, 3.0)
    quadrature = laplace_limit(yule_limit, g)

    nested = laplace_limit(yule_limit, g, mode="nested-mc", n_outer=20_000, n_inner=200_000, rng=rng, tolerance=0.05)

    assert nested.within_tolerance
    assert nested.estimate.within(quadrature.value, 4.0)


def test_quadrature_needs_yule(deterministic_w_limit):
    with pytest.raises(InvalidSpecError):
        laplace_limit(deterministic_w_limit, TestFunction.plateau(1.0, 3.0))


def test_unknown_laplace_mode(yule_limit):
    with pytest.raises(ValueError):
        laplace_limit(yule_limit, TestFunction.plateau(1.0, 3.0), mode="exact")


def test_default_truncation():
    functions = [TestFunction.plateau(1.0, 3.0), TestFunction.ramp(0.5, 1.0)]

    assert default_truncation(functions, [1.0]) == 0.25
    assert default_truncation([], [0.4]) == 0.2
    with pytest.raises(ValueError):
        default_truncation([TestFunction.zero()], [])

import math

import numpy as np
import pytest

from src.branching import (
    BranchingConfig,
    ExponentialW,
    OffspringLaw,
    SimulatedClusterSize,
    SimulatedW,
    YuleClusterSize,
    build_limit_spec,
    cluster_size_pmf,
    extinction_fraction,
    extinction_probability,
    horizon_bias,
    mean_W,
    sample_W,
    sample_cluster_sizes,
    simulate_population,
    singleton_probability,
    survival_curve,
    survival_fraction,
    theta_constant,
)
from src.errors import InvalidSpecError, PopulationExplosionError
from src.normalization import TailScale
from src.verify import Estimate, chi_square_gof, histogram_with_tail, ks_distance, ks_pvalue


def test_offspring_law_validation():
    with pytest.raises(InvalidSpecError):
        OffspringLaw((0.5, 0.5))
    with pytest.raises(InvalidSpecError):
        OffspringLaw((0.2, 0.2, 0.2))
    with pytest.raises(InvalidSpecError):
        BranchingConfig(OffspringLaw((0.0, 0.0, 1.0)), beta=0.0)


def test_malthusian_parameter(yule, binary_with_death):
    assert yule.lam == 1.0
    assert yule.is_yule
    assert binary_with_death.lam == pytest.approx(0.5)
    assert not binary_with_death.is_yule


def test_extinction_probability():
    assert extinction_probability(OffspringLaw((0.0, 0.0, 1.0))) == 0.0
    assert extinction_probability(OffspringLaw((0.25, 0.0, 0.75))) == pytest.approx(1.0 / 3.0, abs=1e-10)


def test_population_at_time_zero(yule, rng):
    assert simulate_population(yule, 0.0, rng) == 1


def test_yule_population_is_geometric(yule, rng):
    # Z_t is geometric with success probability e^{-t}; mean e^t, P(Z_t = 1) = e^{-t}
    t, n = 1.0, 20_000
    counts = np.array([simulate_population(yule, t, rng) for _ in range(n)])

    assert counts.mean() == pytest.approx(math.e, abs=4 * counts.std() / math.sqrt(n))
    p1 = math.exp(-t)
    assert np.mean(counts == 1) == pytest.approx(p1, abs=4 * math.sqrt(p1 * (1 - p1) / n))


def test_population_cap_raises(rng):
    cfg = BranchingConfig(OffspringLaw((0.0, 0.0, 1.0)), beta=1.0, population_cap=50)

    with pytest.raises(PopulationExplosionError) as excinfo:
        simulate_population(cfg, 20.0, rng)

    assert excinfo.value.cap == 50


def test_extinction_fraction_matches_fixed_point(binary_with_death, rng):
    n = 4000
    fraction = extinction_fraction(binary_with_death, 40.0, n, rng)

    assert fraction.within(1.0 / 3.0, 4.0)


def test_survival_curve_limits(yule, binary_with_death):
    assert np.all(survival_curve(yule, [0.0, 5.0]) == 1.0)

    curve = survival_curve(binary_with_death, [0.0, 1.0, 60.0])

    assert curve[0] == pytest.approx(1.0)
    assert curve[0] > curve[1] > curve[2]
    assert curve[2] == pytest.approx(2.0 / 3.0, abs=1e-6)


def test_theta_constant_closed_form(yule):
    theta = theta_constant(yule)

    assert theta.value == 1.0
    assert theta.half_width == 0.0


def test_theta_constant_ode_against_monte_carlo(binary_with_death, rng):
    ode = theta_constant(binary_with_death, mode="ode")
    mc = theta_constant(binary_with_death, mode="monte-carlo", n=4000, rng=rng)

    assert ode.value < 1.0 / binary_with_death.lam
    assert abs(mc.value - ode.value) <= 4 * mc.standard_error + 1e-6


def test_theta_constant_analytic_needs_no_death(binary_with_death):
    with pytest.raises(InvalidSpecError):
        theta_constant(binary_with_death, mode="analytic")


def test_yule_cluster_law_chi_square(yule, rng):
    draws = sample_cluster_sizes(yule, rng, 100_000)
    histogram = histogram_with_tail(draws, 20)
    pmf = cluster_size_pmf(yule, 20)

    result = chi_square_gof(histogram, np.append(pmf, 1.0 - pmf.sum()))

    assert draws.min() >= 1
    assert result.p_value > 0.001


def test_cluster_pmf_forward_equations_sum_below_one(binary_with_death):
    pmf = cluster_size_pmf(binary_with_death, 10)

    assert np.all(pmf > 0)
    assert pmf.sum() < 1.0
    assert pmf[0] > pmf[1]


def test_conditional_time_cluster_draws_match_forward_equations(binary_with_death, rng):
    pmf = cluster_size_pmf(binary_with_death, 5)
    draws = sample_cluster_sizes(binary_with_death, rng, 5000)

    result = chi_square_gof(histogram_with_tail(draws, 5), np.append(pmf, max(0.0, 1.0 - pmf.sum())))

    assert result.p_value > 0.001


def test_yule_shortcut_rejected_for_other_laws(binary_with_death, rng):
    with pytest.raises(InvalidSpecError):
        sample_cluster_sizes(binary_with_death, rng, 10, mode="yule")


def test_singleton_probability(yule, binary_with_death, rng):
    assert singleton_probability(yule, 10).value == 0.5

    estimate = singleton_probability(binary_with_death, 5000, rng)
    exact = cluster_size_pmf(binary_with_death, 1)[0]

    assert estimate.within(exact, 4.0)


def test_sample_W_mean_is_one(yule, rng):
    values = [sample_W(yule, 6.0, rng) for _ in range(2000)]

    assert np.mean(values) == pytest.approx(1.0, abs=4 * np.std(values) / math.sqrt(len(values)))


def test_build_limit_spec_yule(yule):
    spec = build_limit_spec(yule, TailScale(1.5, 1.0, 1.0))

    assert spec.is_yule
    assert spec.theta == 1.0
    assert isinstance(spec.w_sampler, ExponentialW)
    assert isinstance(spec.t_sampler, YuleClusterSize)
    assert spec.singleton.value == 0.5


def test_build_limit_spec_with_death(binary_with_death, rng):
    spec = build_limit_spec(
        binary_with_death, TailScale(1.5, 1.0, 1.0), rng=rng, w_horizon=10.0, singleton_draws=500, survival_w_draws=200
    )

    assert not spec.is_yule
    assert isinstance(spec.t_sampler, SimulatedClusterSize)
    assert spec.extinction == pytest.approx(1.0 / 3.0, abs=1e-10)
    assert spec.survival_w_sample.shape == (200,)
    assert np.all(spec.survival_w_sample > 0)


def test_build_limit_spec_needs_stream_for_other_laws(binary_with_death):
    with pytest.raises(ValueError):
        build_limit_spec(binary_with_death, TailScale(1.5, 1.0, 1.0))


def test_mean_W_exponential(yule_limit, rng):
    estimate = mean_W(yule_limit, rng, 50_000)

    assert estimate.within(1.0, 4.0)


def test_yule_W_is_exponential(yule, rng):
    values = np.array([sample_W(yule, 6.0, rng) for _ in range(2000)])

    distance = ks_distance(values, lambda x: 1.0 - np.exp(-np.maximum(x, 0.0)))

    assert ks_pvalue(distance, values.size) > 1e-3


def test_survival_fraction_matches_extinction(binary_with_death, rng):
    estimate = survival_fraction(SimulatedW(binary_with_death, 12.0), rng, 2000)

    assert estimate.within(2.0 / 3.0, 4.0)
    assert survival_fraction(ExponentialW(), rng, 1000) == Estimate(1.0, 0.0)


def test_horizon_bias_compares_two_horizons(binary_with_death, rng, mocker):
    mocker.patch("src.branching.limit_spec.default_w_horizon", return_value=8.0)

    means = horizon_bias(binary_with_death, rng, 500)

    assert sorted(means) == [4.0, 8.0]
    for estimate in means.values():
        assert estimate.within(1.0, 4.0)


@pytest.mark.slow
def test_population_generating_function_semigroup(binary_with_death, make_rng):
    # E x^{Z_2} = F_1(F_1(x)) with F_s(x) = E x^{Z_s}
    n, x = 20_000, 0.5
    streams = {tag: make_rng(0, tag) for tag in ("inner", "outer", "direct")}
    inner = np.array([simulate_population(binary_with_death, 1.0, streams["inner"]) for _ in range(n)])
    outer = np.array([simulate_population(binary_with_death, 1.0, streams["outer"]) for _ in range(n)])
    direct = np.array([simulate_population(binary_with_death, 2.0, streams["direct"]) for _ in range(n)])

    y = np.mean(x**inner)
    composed = np.mean(y**outer)
    expected = np.mean(x**direct)

    slope = np.mean(outer * y ** np.maximum(outer - 1, 0))
    spread = math.sqrt((np.var(x**direct) + np.var(y**outer) + slope**2 * np.var(x**inner)) / n)
    assert abs(composed - expected) <= 4 * spread

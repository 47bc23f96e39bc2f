"""Continuous-time Galton-Watson population, simulated generation by generation.

Every individual lives an Exp(beta) lifetime and is replaced by k offspring
with probability p_k. Processing a whole generation at once with numpy arrays
is an exact simulation of the event-driven process: the population at t is
the set of individuals born before t whose death time falls after t.
"""
import logging
import math
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from ..errors import ConvergenceError, InvalidSpecError, PopulationExplosionError
from ..rng import RandomStream
from ..verify.estimate import Estimate
from .offspring import BranchingConfig, extinction_probability

logger = logging.getLogger(__name__)

ESCAPE_LINEAGES = 64
MAX_REJECTIONS = 10_000


def simulate_population(cfg: BranchingConfig, t: float, rng: RandomStream) -> int:
    """Z_t for a population started from one individual at time 0."""
    if t < 0:
        raise ValueError(f"Time must be nonnegative, got {t}")
    births = np.zeros(1)
    alive = 0
    while births.size:
        deaths = births + rng.exponential(1.0 / cfg.beta, births.size)
        survives = deaths > t
        alive += int(np.count_nonzero(survives))
        splitting = deaths[~survives]
        births = np.repeat(splitting, cfg.offspring.sample(rng, splitting.size))
        if alive + births.size > cfg.population_cap:
            raise PopulationExplosionError(alive + births.size, cfg.population_cap)
    return alive


def extinction_time(cfg: BranchingConfig, horizon: float, rng: RandomStream) -> float:
    """Extinction time if it happens before ``horizon``, otherwise inf.

    Once ESCAPE_LINEAGES independent lineages are pending the population is
    declared surviving; the error this introduces is at most q^ESCAPE_LINEAGES
    with q the extinction probability.
    """
    births = np.zeros(1)
    last_death = 0.0
    while births.size:
        if births.size >= ESCAPE_LINEAGES:
            return math.inf
        deaths = births + rng.exponential(1.0 / cfg.beta, births.size)
        if np.any(deaths > horizon):
            return math.inf
        last_death = max(last_death, float(deaths.max()))
        births = np.repeat(deaths, cfg.offspring.sample(rng, deaths.size))
    return last_death


def default_w_horizon(cfg: BranchingConfig) -> float:
    return max(12.0 / cfg.lam, math.log(1e4) / cfg.lam)


def sample_W(cfg: BranchingConfig, horizon: float, rng: RandomStream) -> float:
    """Truncation approximation e^{-lam t_W} Z_{t_W} of the martingale limit W."""
    if math.exp(cfg.lam * horizon) < 100:
        logger.warning(f"W horizon {horizon} gives e^(lam t_W) < 100; the truncation bias will be visible")
    return math.exp(-cfg.lam * horizon) * simulate_population(cfg, horizon, rng)


def survival_curve(cfg: BranchingConfig, r) -> np.ndarray:
    """P(Z_r > 0) from the backward equation q' = beta (f(q) - q), q(0) = 0."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r < 0):
        raise ValueError("Times must be nonnegative")
    if cfg.offspring.p0 == 0:
        return np.ones_like(r)
    order = np.argsort(r)
    grid = r[order]
    solution = solve_ivp(
        lambda _, q: cfg.beta * (cfg.offspring.generating_function(q) - q),
        (0.0, float(grid[-1]) if grid[-1] > 0 else 1.0),
        [0.0],
        t_eval=grid,
        method="DOP853",
        rtol=1e-10,
        atol=1e-13,
    )
    if not solution.success:
        raise ConvergenceError(f"Survival ODE failed: {solution.message}")
    out = np.empty_like(r)
    out[order] = 1.0 - solution.y[0]
    return out


def _theta_ode(cfg: BranchingConfig) -> Estimate:
    lam, beta = cfg.lam, cfg.beta
    r_max = math.log(1e14) / lam

    def rhs(r, y):
        q, _ = y
        return [beta * (cfg.offspring.generating_function(q) - q), math.exp(-lam * r) * (1.0 - q)]

    solution = solve_ivp(rhs, (0.0, r_max), [0.0, 0.0], method="DOP853", rtol=1e-11, atol=1e-14)
    if not solution.success:
        raise ConvergenceError(f"Survival ODE failed: {solution.message}")
    q_end, integral = solution.y[:, -1]
    tail = (1.0 - q_end) * math.exp(-lam * r_max) / lam
    return Estimate(integral + tail, 1e-9 * (integral + tail))


def _theta_monte_carlo(cfg: BranchingConfig, n: int, r_max: Optional[float], rng: RandomStream) -> Estimate:
    lam = cfg.lam
    if r_max is None:
        r_max = math.log(1e7) / lam
    remainder = math.exp(-lam * r_max)
    if remainder >= 1e-6:
        raise ConvergenceError(f"Quadrature tail e^(-lam r_max) = {remainder:.3g} is not below 1e-6")
    times = np.array([extinction_time(cfg, r_max, rng) for _ in range(n)])
    contributions = (1.0 - np.exp(-lam * np.minimum(times, r_max))) / lam
    estimate = Estimate.from_samples(contributions)
    surviving = float(np.mean(np.isinf(times)))
    tail = surviving * remainder / lam
    return Estimate(estimate.value + tail, estimate.half_width + remainder / lam)


def theta_constant(
    cfg: BranchingConfig,
    mode: str = "auto",
    n: int = 20_000,
    r_max: Optional[float] = None,
    rng: Optional[RandomStream] = None,
) -> Estimate:
    """vartheta = int_0^inf e^{-lam r} P(Z_r > 0) dr."""
    if mode in ("auto", "analytic") and cfg.offspring.p0 == 0:
        return Estimate.exact(1.0 / cfg.lam)
    if mode == "analytic":
        raise InvalidSpecError("vartheta has no closed form when p0 > 0")
    if mode in ("auto", "ode"):
        return _theta_ode(cfg)
    if mode == "monte-carlo":
        if rng is None:
            raise ValueError("Monte Carlo mode needs a random stream")
        return _theta_monte_carlo(cfg, n, r_max, rng)
    raise ValueError(f"Unknown mode {mode!r}")


def _yule_cluster_sizes(rng: RandomStream, size: int) -> np.ndarray:
    # P(T > k) = 1 / (k + 1), so T = floor(1 / U) with U uniform on (0, 1].
    u = 1.0 - rng.random(size)
    return np.floor(1.0 / u).astype(np.int64)


def sample_cluster_size(cfg: BranchingConfig, rng: RandomStream, mode: str = "auto") -> int:
    """One draw of T with P(T = k) = vartheta^-1 int e^{-lam r} P(Z_r = k) dr."""
    if mode == "yule" or (mode == "auto" and cfg.is_yule):
        if not cfg.is_yule:
            raise InvalidSpecError("The Yule shortcut needs p2 == 1")
        return int(_yule_cluster_sizes(rng, 1)[0])
    if mode not in ("auto", "conditional-time"):
        raise ValueError(f"Unknown mode {mode!r}")
    # R ~ Exp(lam) and Z_R given Z_R > 0: the accepted Z_R has exactly the law of T.
    for _ in range(MAX_REJECTIONS):
        r = rng.exponential(1.0 / cfg.lam)
        z = simulate_population(cfg, r, rng)
        if z > 0:
            return z
    raise ConvergenceError(f"No surviving population in {MAX_REJECTIONS} tries; check vartheta")


def sample_cluster_sizes(cfg: BranchingConfig, rng: RandomStream, size: int, mode: str = "auto") -> np.ndarray:
    if mode == "yule" or (mode == "auto" and cfg.is_yule):
        if not cfg.is_yule:
            raise InvalidSpecError("The Yule shortcut needs p2 == 1")
        return _yule_cluster_sizes(rng, size)
    return np.array([sample_cluster_size(cfg, rng, mode) for _ in range(size)], dtype=np.int64)


def cluster_size_pmf(cfg: BranchingConfig, k_max: int, truncation: Optional[int] = None) -> np.ndarray:
    """P(T = k) for k = 1..k_max.

    Outside the Yule case this integrates the forward equations of Z on the
    states 0..truncation against e^{-lam r}; mass leaving the truncated range
    is dropped.
    """
    k = np.arange(1, k_max + 1)
    if cfg.is_yule:
        return 1.0 / (k * (k + 1.0))
    size = (truncation or max(4 * k_max, 200)) + 1
    beta, lam = cfg.beta, cfg.lam
    probs = np.asarray(cfg.offspring.probabilities)
    generator = np.zeros((size, size))
    for j in range(1, size):
        generator[j, j] -= beta * j
        for offspring, p in enumerate(probs):
            target = j - 1 + offspring
            if p > 0 and target < size:
                generator[j, target] += beta * j * p
    transposed = generator.T.copy()

    def rhs(r, y):
        current = y[:size]
        return np.concatenate([transposed @ current, math.exp(-lam * r) * current])

    start = np.zeros(2 * size)
    start[1] = 1.0
    r_max = math.log(1e10) / lam
    solution = solve_ivp(rhs, (0.0, r_max), start, method="BDF", rtol=1e-9, atol=1e-13)
    if not solution.success:
        raise ConvergenceError(f"Forward equations failed: {solution.message}")
    weighted = solution.y[size:, -1]
    theta = theta_constant(cfg, mode="auto").value
    return weighted[1 : k_max + 1] / theta


def singleton_probability(cfg: BranchingConfig, n: int, rng: Optional[RandomStream] = None) -> Estimate:
    """P(T = 1), exact for Yule and estimated from ``n`` cluster draws otherwise."""
    if cfg.is_yule:
        return Estimate.exact(0.5)
    if rng is None:
        raise ValueError("Estimating P(T = 1) needs a random stream")
    draws = sample_cluster_sizes(cfg, rng, n)
    return Estimate.proportion(int(np.count_nonzero(draws == 1)), n)


def extinction_fraction(cfg: BranchingConfig, t: float, n: int, rng: RandomStream) -> Estimate:
    """Fraction of n populations extinct by time t, next to extinction_probability."""
    extinct = sum(1 for _ in range(n) if extinction_time(cfg, t, rng) < math.inf)
    logger.debug(f"Extinction fraction {extinct}/{n}, fixed point {extinction_probability(cfg.offspring):.6f}")
    return Estimate.proportion(extinct, n)

"""One-large-jump diagnostics for simulated genealogies.

A_t(theta): along every surviving line of descent at most one increment
exceeds h theta / t. B_t(rho): every surviving leaf has at most rho t
ancestors. Both events have probability tending to 1.
"""
import logging
import math
from typing import Tuple

import numpy as np
from scipy.optimize import brentq

from ..branching import BranchingConfig
from ..normalization import TailScale
from .simulator import ParticleTree

logger = logging.getLogger(__name__)


def large_jump_counts(tree: ParticleTree, threshold: float) -> np.ndarray:
    """Per node, the number of increments above ``threshold`` along its ancestor chain."""
    counts = (np.abs(tree.increment) > threshold).astype(np.int64)
    for level in tree.levels()[1:]:
        counts[level] += counts[tree.parent[level]]
    return counts


def one_large_jump_check(tree: ParticleTree, h: float, t: float, theta: float, rho: float) -> Tuple[bool, bool]:
    if tree.extinct:
        return True, True
    leaves = tree.leaves
    if t > 0:
        jumps = large_jump_counts(tree, h * theta / t)
        a_holds = bool(np.all(jumps[leaves] <= 1))
    else:
        a_holds = True
    b_holds = bool(tree.generation[leaves].max() <= rho * t)
    return a_holds, b_holds


def _rate_function(rho: float, beta: float) -> float:
    return rho * (math.log(rho) - math.log(beta)) - rho + beta


def default_rho(beta: float, lam: float) -> float:
    """max(beta + 2, smallest rho > beta with rho (log rho - log beta) - rho + beta > lam)."""
    hi = 2.0 * beta + 1.0
    while _rate_function(hi, beta) <= lam:
        hi *= 2.0
    root = brentq(lambda r: _rate_function(r, beta) - lam, beta, hi, xtol=1e-12)
    return max(beta + 2.0, root * (1.0 + 1e-6))


def jump_probability_bound(c0: float, scale: TailScale, h: float, t: float, theta: float) -> float:
    """p_t = 2 c0 theta^-alpha t^(1+alpha) h^-alpha L(h) ((theta/t)^(1/2) + (theta/t)^(-1/2))."""
    alpha = scale.alpha
    ratio = theta / t
    return (
        2.0
        * c0
        * theta ** (-alpha)
        * t ** (1.0 + alpha)
        * h ** (-alpha)
        * float(scale.slowly_varying(h))
        * (math.sqrt(ratio) + 1.0 / math.sqrt(ratio))
    )


def one_large_jump_bound(cfg: BranchingConfig, p_t: float, t: float) -> float:
    """Upper bound e^(lam t) p_t^2 (2 beta + (1 + p_t) beta^2) e^(beta p_t) on P(A_t(theta) fails)."""
    beta = cfg.beta
    return math.exp(cfg.lam * t) * p_t**2 * (2.0 * beta + (1.0 + p_t) * beta**2) * math.exp(beta * p_t)


def generation_bound(cfg: BranchingConfig, rho: float, t: float) -> float:
    """Upper bound e^(lam t) exp(-(rho (log rho - log beta) - rho + beta) t) on P(B_t(rho) fails)."""
    return math.exp((cfg.lam - _rate_function(rho, cfg.beta)) * t)

from .limit_spec import (
    ConstantW,
    ExponentialW,
    LimitSpec,
    SimulatedClusterSize,
    SimulatedW,
    SurvivalConditionedW,
    YuleClusterSize,
    build_limit_spec,
    horizon_bias,
    mean_W,
    survival_fraction,
)
from .offspring import BranchingConfig, OffspringLaw, extinction_probability
from .population import (
    cluster_size_pmf,
    default_w_horizon,
    extinction_fraction,
    extinction_time,
    sample_cluster_size,
    sample_cluster_sizes,
    sample_W,
    simulate_population,
    singleton_probability,
    survival_curve,
    theta_constant,
)

__all__ = [
    'BranchingConfig',
    'ConstantW',
    'ExponentialW',
    'LimitSpec',
    'OffspringLaw',
    'SimulatedClusterSize',
    'SimulatedW',
    'SurvivalConditionedW',
    'YuleClusterSize',
    'build_limit_spec',
    'cluster_size_pmf',
    'default_w_horizon',
    'extinction_fraction',
    'extinction_probability',
    'extinction_time',
    'horizon_bias',
    'mean_W',
    'sample_W',
    'sample_cluster_size',
    'sample_cluster_sizes',
    'simulate_population',
    'singleton_probability',
    'survival_curve',
    'survival_fraction',
    'theta_constant',
]

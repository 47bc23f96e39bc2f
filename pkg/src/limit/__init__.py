from .sampler import (
    LAPLACE_MODES,
    LaplaceLimit,
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

__all__ = [
    'LAPLACE_MODES',
    'LaplaceLimit',
    'cluster_laplace',
    'default_truncation',
    'laplace_limit',
    'leftmost_law_sf',
    'max_law_cdf',
    'mean_count_above',
    'sample_limit_order_statistics',
    'sample_limit_process',
    'second_order_cdf',
    'second_order_curve',
]

from .estimate import Z_95, Estimate
from .statistics import (
    KS_SD,
    ChiSquareResult,
    ConvergenceReport,
    ConvergenceRow,
    LaplaceComparison,
    chi_square_gof,
    convergence_report,
    empirical_cdf_estimate,
    histogram_with_tail,
    ks_distance,
    ks_estimate,
    ks_pvalue,
    laplace_compare,
    laplace_compare_values,
)

__all__ = [
    'ChiSquareResult',
    'ConvergenceReport',
    'ConvergenceRow',
    'Estimate',
    'KS_SD',
    'LaplaceComparison',
    'Z_95',
    'chi_square_gof',
    'convergence_report',
    'empirical_cdf_estimate',
    'histogram_with_tail',
    'ks_distance',
    'ks_estimate',
    'ks_pvalue',
    'laplace_compare',
    'laplace_compare_values',
]

"""Numerical models: special functions, intensities, marginals, residuals and scaling."""

from .special_fn import (OrderParam, SeriesEvalConfig, mwright, mwright_integral, mwright_density,
                         g_beta, h_beta, mwright_moment, mwright_moment_exact)
from .intensity import IntensityModel, PowerLaw, Linear, parse_model, check_condition_ii
from .quadrature import QuadratureReport, adaptive_quad, tail_cutoff
from .summation import compensated_sum, rounding_bound
from .marginals import (MarginalQuery, marginal, marginal_subordination, fpp_series_oracle,
                        distribution, marginal_table, truncated_distribution, poisson_log_pmf)
from .fractional_ops import (TimeGrid, ResidualReport, make_grid, caputo_derivative, singular_exponents,
                             kf_residual, fnhpp_residual, convergence_order)
from .scaling import (ScalingPoint, ScalingCurve, SaddlePoint, scaling_curve, corollary_curve,
                      poisson_degenerate, saddle_point)

__all__ = [
    'OrderParam', 'SeriesEvalConfig', 'mwright', 'mwright_integral', 'mwright_density', 'g_beta',
    'h_beta', 'mwright_moment', 'mwright_moment_exact',
    'IntensityModel', 'PowerLaw', 'Linear', 'parse_model', 'check_condition_ii',
    'QuadratureReport', 'adaptive_quad', 'tail_cutoff', 'compensated_sum',
    'rounding_bound',
    'MarginalQuery', 'marginal', 'marginal_subordination', 'fpp_series_oracle', 'distribution',
    'marginal_table', 'truncated_distribution', 'poisson_log_pmf',
    'TimeGrid', 'ResidualReport', 'make_grid', 'caputo_derivative', 'singular_exponents',
    'kf_residual', 'fnhpp_residual', 'convergence_order',
    'ScalingPoint', 'ScalingCurve', 'SaddlePoint', 'scaling_curve', 'corollary_curve',
    'poisson_degenerate', 'saddle_point',
]

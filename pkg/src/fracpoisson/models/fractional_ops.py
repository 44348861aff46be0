"""Caputo derivative on uniform grids and residuals of the forward equations."""

from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Union
import logging
import math

import numpy as np
from scipy.special import gamma, gammaln

from ..config import DEFAULT_TOL
from ..errors import DomainError
from .intensity import IntensityModel, Linear
from .marginals import marginal_table, poisson_log_pmf
from .quadrature import adaptive_quad, breakpoints_around, tail_cutoff
from .special_fn import DEFAULT_SERIES, OrderLike, SeriesEvalConfig, as_order, h_beta, mwright_density

logger = logging.getLogger(__name__)

MIN_GRID_POINTS = 16
# Residuals are compared on t >= horizon * INTERIOR_FRACTION.
INTERIOR_FRACTION = 1.0 / 8.0
RICHARDSON_SAFETY = 2.0
# Starting weights correct the powers t**g with g below this.
MAX_CORRECTED_EXPONENT = 2.0
SUPPORTS = ('half_line', 'window')

Samples = Union[Callable[[np.ndarray], np.ndarray], Sequence[float], np.ndarray]


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid h, 2h, ..., size*h."""

    spacing: float
    size: int

    def __post_init__(self):
        if not (math.isfinite(self.spacing) and self.spacing > 0):
            raise DomainError('grid spacing must be positive', {'h': self.spacing})
        if isinstance(self.size, bool) or int(self.size) != self.size or self.size < MIN_GRID_POINTS:
            raise DomainError(f'grid needs at least {MIN_GRID_POINTS} points', {'size': self.size})
        object.__setattr__(self, 'size', int(self.size))

    @property
    def points(self) -> np.ndarray:
        return self.spacing * np.arange(1, self.size + 1)

    @property
    def nodes(self) -> np.ndarray:
        """Grid points with t = 0 prepended."""
        return self.spacing * np.arange(self.size + 1)

    @property
    def horizon(self) -> float:
        return self.spacing * self.size

    def refined(self) -> 'TimeGrid':
        return TimeGrid(self.spacing / 2.0, 2 * self.size)

    def interior(self) -> np.ndarray:
        return self.points >= self.horizon * INTERIOR_FRACTION


def make_grid(horizon: float, h: float) -> TimeGrid:
    """Grid on (0, horizon] with step h; horizon must be a multiple of h."""
    if not (math.isfinite(horizon) and horizon > 0 and math.isfinite(h) and h > 0):
        raise DomainError('horizon and h must be positive', {'horizon': horizon, 'h': h})
    size = round(horizon / h)
    if abs(size * h - horizon) > 1e-9 * horizon:
        raise DomainError('horizon must be an integer multiple of h', {'horizon': horizon, 'h': h})
    return TimeGrid(float(h), size)


@dataclass(frozen=True)
class ResidualReport:
    """Caputo derivative against the right-hand side on a grid."""

    grid: TimeGrid
    lhs: List[float]
    rhs: List[float]
    max_abs_residual: float
    expected_discretization_bound: float

    @property
    def residuals(self) -> np.ndarray:
        return np.asarray(self.lhs) - np.asarray(self.rhs)

    def within_bound(self) -> bool:
        return self.max_abs_residual <= self.expected_discretization_bound


def singular_exponents(beta: OrderLike, model: Optional[IntensityModel] = None) -> List[float]:
    """Non-integer exponents c*beta*k < 2 in the small-t expansion of P_beta(n, t).

    These are the powers on which the plain L1 scheme loses its
    O(h^(2-beta)) accuracy; integer powers need no correction.
    """
    b = as_order(beta).require_fractional()
    c = (model or Linear(1.0)).c
    step = c * b
    count = math.ceil(MAX_CORRECTED_EXPONENT / step) - 1
    powers = [step * k for k in range(1, count + 1) if step * k < MAX_CORRECTED_EXPONENT - 1e-12]
    return [g for g in powers if not _is_integer(g)]


def _is_integer(value: float) -> bool:
    return abs(value - round(value)) < 1e-12


def _sample_values(samples: Samples, grid: TimeGrid) -> np.ndarray:
    nodes = grid.nodes
    if callable(samples):
        try:
            values = np.asarray(samples(nodes), dtype=float)
        except (TypeError, ValueError):
            values = None
        if values is None or values.shape != nodes.shape:
            values = np.array([float(samples(t)) for t in nodes])
    else:
        values = np.asarray(samples, dtype=float)
    if values.shape != nodes.shape:
        raise DomainError('samples must cover t = 0 and every grid point',
                          {'expected': nodes.size, 'got': values.size})
    return values


def _l1_reference(exponent: float, beta: float, size: int) -> np.ndarray:
    """L1 derivative of j**exponent at j = 1..size for unit spacing."""
    j = np.arange(size + 1, dtype=float)
    diffs = np.diff(j ** exponent)
    m = np.arange(size, dtype=float)
    weights = (m + 1.0) ** (1.0 - beta) - m ** (1.0 - beta)
    return np.convolve(weights, diffs)[:size] / gamma(2.0 - beta)


def starting_weights(beta: float, size: int, exponents: Sequence[float]) -> np.ndarray:
    """Correction weights making the unit-spacing L1 scheme exact on t**exponent.

    The exponent 1 is always part of the system, with a zero target since
    L1 is exact on linear data; without it the weights would spoil that.

    Args:
        beta: order in (0, 1).
        size: number of grid points n = 1..size.
        exponents: non-integer powers to correct.

    Returns:
        Array (size, m) acting on f(j) - f(0), j = 1..m, where m counts the
        distinct exponents including 1.
    """
    exps = np.unique(np.append(np.asarray(list(exponents), dtype=float), 1.0))
    m = exps.size
    j = np.arange(1, m + 1, dtype=float)
    n = np.arange(1, size + 1, dtype=float)
    vander = j[None, :] ** exps[:, None]
    target = np.empty((m, size))
    for row, gamma_k in enumerate(exps):
        exact = np.exp(gammaln(gamma_k + 1.0) - gammaln(gamma_k + 1.0 - beta)) * n ** (gamma_k - beta)
        target[row] = exact - _l1_reference(gamma_k, beta, size)
    return np.linalg.solve(vander, target).T


def caputo_derivative(samples: Samples, beta: OrderLike, grid: TimeGrid,
                      singular_exponents: Sequence[float] = ()) -> np.ndarray:
    """L1 approximation of the Caputo derivative of order beta at each grid point.

    Args:
        samples: a function of t (vectorised or not) or the values at
            t = 0, h, ..., size*h.
        beta: order in (0, 1).
        grid: the TimeGrid.
        singular_exponents: non-integer powers g in (0, 2). The scheme then
            gains starting weights on f(t_j) - f(0), j <= m, so that it is
            exact on t**g for each listed g and still exact on t.

    Returns:
        The derivative at grid.points, an array of length grid.size.
    """
    b = as_order(beta).require_fractional()
    if not isinstance(grid, TimeGrid):
        raise DomainError('grid must be a TimeGrid', {'grid': grid})
    values = _sample_values(samples, grid)
    h, size = grid.spacing, grid.size

    diffs = np.diff(values)
    m = np.arange(size, dtype=float)
    weights = (m + 1.0) ** (1.0 - b) - m ** (1.0 - b)
    derivative = np.convolve(weights, diffs)[:size] / (gamma(2.0 - b) * h ** b)

    exps = [g for g in singular_exponents if 0.0 < g < MAX_CORRECTED_EXPONENT and not _is_integer(g)]
    if exps:
        start = starting_weights(b, size, exps)
        m = start.shape[1]
        if m > size:
            raise DomainError('more singular exponents than grid points', {'count': m})
        derivative = derivative + start @ (values[1:m + 1] - values[0]) / h ** b
    return derivative


def _marginal_table(times: np.ndarray, n: int, beta: float, model: IntensityModel,
                    tol: float, cfg: SeriesEvalConfig) -> np.ndarray:
    """Rows [P(n-1, t), P(n, t)] per time, with P(-1, t) = 0."""
    counts = [n - 1, n] if n > 0 else [n]
    values = marginal_table(times, beta, model, counts, tol, cfg)
    if n == 0:
        return np.column_stack([np.zeros(times.size), values[:, 0]])
    return values


def _richardson_bound(lhs_coarse: np.ndarray, lhs_fine: np.ndarray, grid: TimeGrid,
                      beta: float, tol: float) -> float:
    interior = grid.interior()
    # coarse point k*h is fine point 2k*(h/2), at index 2k-1 of the fine points
    matched = lhs_fine[1::2]
    change = float(np.max(np.abs(lhs_coarse - matched)[interior]))
    order = 2.0 - beta
    return RICHARDSON_SAFETY * change / (1.0 - 2.0 ** (-order)) + 100.0 * tol


def _report(grid: TimeGrid, lhs: np.ndarray, rhs: np.ndarray, bound: float) -> ResidualReport:
    residual = np.abs(lhs - rhs)[grid.interior()]
    return ResidualReport(grid=grid, lhs=lhs.tolist(), rhs=rhs.tolist(),
                          max_abs_residual=float(np.max(residual)),
                          expected_discretization_bound=bound)


def _check_n(n: int) -> int:
    if isinstance(n, bool) or int(n) != n or n < 0:
        raise DomainError('n must be a nonnegative integer', {'n': n})
    return int(n)


def _lhs_pair(n: int, beta: float, model: IntensityModel, grid: TimeGrid, tol: float,
              cfg: SeriesEvalConfig):
    """Caputo derivative of P(n, .) on the grid and on its refinement, plus the table."""
    fine = grid.refined()
    table = _marginal_table(fine.nodes, n, beta, model, tol / 10.0, cfg)
    exps = singular_exponents(beta, model)
    lhs_fine = caputo_derivative(table[:, 1], beta, fine, exps)
    lhs = caputo_derivative(table[::2, 1], beta, grid, exps)
    return lhs, lhs_fine, table[::2]


def kf_residual(n: int, beta: OrderLike, grid: TimeGrid, tol: float = DEFAULT_TOL,
                cfg: Optional[SeriesEvalConfig] = None) -> ResidualReport:
    """Residual of D^b P(n, t) = P(n-1, t) - P(n, t) for the unit-rate process.

    Marginals are sampled at tol/10 on the grid refined once; the refined
    derivative supplies the Richardson estimate of the discretisation error.
    """
    cfg = cfg or DEFAULT_SERIES
    n = _check_n(n)
    b = as_order(beta).require_fractional()
    lhs, lhs_fine, table = _lhs_pair(n, b, Linear(1.0), grid, tol, cfg)
    rhs = table[1:, 0] - table[1:, 1]
    bound = _richardson_bound(lhs, lhs_fine, grid, b, tol)
    report = _report(grid, lhs, rhs, bound)
    logger.info('kf residual n=%d beta=%g h=%g: max %.3g (bound %.3g)',
                n, b, grid.spacing, report.max_abs_residual, bound)
    return report


def _rhs_half_line(n: int, beta: float, model: IntensityModel, t: float, tol: float,
                   cfg: SeriesEvalConfig) -> float:
    """int_0^inf lambda(z t^b) [Pois(n-1) - Pois(n)](Lambda(z t^b)) M_b(z) dz."""
    t_beta = t ** beta

    def integrand(z):
        x = z * t_beta
        lam = np.asarray(model.cumulative(x))
        rate = np.asarray(model.derivative(x))
        pois = -np.exp(poisson_log_pmf(n, lam))
        if n > 0:
            pois = pois + np.exp(poisson_log_pmf(n - 1, lam))
        return rate * pois * mwright_density(beta, z, cfg)

    breakpoints = []
    for k in (n - 1, n):
        if k >= 1:
            z0 = float(model.invert(float(k))) / t_beta
            breakpoints.extend(breakpoints_around(z0, z0 / (model.c * math.sqrt(k))))
    start = max(breakpoints + [1.0])
    z_max = tail_cutoff(integrand, start=start, tail_tol=tol / 10.0)
    breakpoints.extend(np.linspace(0.0, z_max, 9))
    return adaptive_quad(integrand, 0.0, z_max, tol=0.9 * tol, breakpoints=breakpoints).value


def _rhs_window(n: int, beta: float, model: IntensityModel, t: float, tol: float,
                cfg: SeriesEvalConfig) -> float:
    """int_0^t lambda(u) [Pois(n-1) - Pois(n)](Lambda(u)) h_b(t, u) du."""
    def integrand(u):
        lam = np.asarray(model.cumulative(u))
        rate = np.asarray(model.derivative(u))
        pois = -np.exp(poisson_log_pmf(n, lam))
        if n > 0:
            pois = pois + np.exp(poisson_log_pmf(n - 1, lam))
        return rate * pois * h_beta(beta, t, u, cfg)

    return adaptive_quad(integrand, 0.0, t, tol=tol, breakpoints=np.linspace(0.0, t, 9)).value


def fnhpp_residual(n: int, beta: OrderLike, model: IntensityModel, grid: TimeGrid,
                   tol: float = DEFAULT_TOL, cfg: Optional[SeriesEvalConfig] = None,
                   support: str = 'half_line') -> ResidualReport:
    """Residual of the integro-differential system for a general intensity.

    ``support='half_line'`` integrates the subordinator variable over
    (0, inf), which for Lambda(x) = x gives back the unit-rate equations;
    ``support='window'`` integrates over (0, t).
    """
    cfg = cfg or DEFAULT_SERIES
    n = _check_n(n)
    b = as_order(beta).require_fractional()
    if support not in SUPPORTS:
        raise DomainError(f'support must be one of {SUPPORTS}', {'support': support})
    lhs, lhs_fine, _ = _lhs_pair(n, b, model, grid, tol, cfg)
    rhs_fn = _rhs_half_line if support == 'half_line' else _rhs_window
    rhs = np.array([rhs_fn(n, b, model, float(t), tol, cfg) for t in grid.points])
    bound = _richardson_bound(lhs, lhs_fine, grid, b, tol)
    report = _report(grid, lhs, rhs, bound)
    logger.info('fnhpp residual n=%d beta=%g model=%s support=%s h=%g: max %.3g',
                n, b, model.label(), support, grid.spacing, report.max_abs_residual)
    return report


def convergence_order(reports: Sequence[ResidualReport]) -> List[float]:
    """Empirical orders log(r_i / r_{i+1}) / log(h_i / h_{i+1}) between successive grids."""
    if len(reports) < 2:
        raise DomainError('convergence_order needs at least two reports')
    orders = []
    for coarse, fine in zip(reports, reports[1:]):
        ratio_h = coarse.grid.spacing / fine.grid.spacing
        if ratio_h <= 1:
            raise DomainError('reports must be ordered by decreasing spacing')
        orders.append(math.log(coarse.max_abs_residual / fine.max_abs_residual) / math.log(ratio_h))
    return orders

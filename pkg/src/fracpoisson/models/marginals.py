"""Marginal probabilities P_beta(n, t) of the fractional non-homogeneous Poisson process."""

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence
import logging
import math

import numpy as np
from scipy.special import gamma, gammainc, gammaln, xlogy

from ..config import DEFAULT_TOL
from ..errors import DomainError, NonConvergence, PrecisionLoss, ToleranceNotMet
from .intensity import IntensityModel, Linear
from .quadrature import QuadratureReport, adaptive_quad, breakpoints_around, tail_cutoff
from .special_fn import DEFAULT_SERIES, OrderLike, OrderParam, SeriesEvalConfig, as_order, mwright_density
from .summation import compensated_sum

logger = logging.getLogger(__name__)

ORACLE_MAX_N = 50
ORACLE_TERM_TOL = 1e-15
# Per-term rounding in ulp (Gamma value, final cast, division) and the
# largest rounding bound the oracle accepts.
ORACLE_ULPS = 4.0
ORACLE_ERROR_TOL = 1e-8
MAX_EVALS = 200_000

# Peak panels sit at z0 +- k*sigma; the tail search starts past the last one.
_PEAK_MULTIPLES = (1, 2, 4, 8, 16)
_TAIL_START_SIGMAS = 8.0
# Tables seed panels from at most this many times, taken where t^beta >= fraction * max t^beta.
_TABLE_SEED_TIMES = 6
_TABLE_SEED_FRACTION = 1.0 / 8.0


@dataclass(frozen=True)
class MarginalQuery:
    """Inputs of P_beta(n, t) for a given intensity."""

    n: int
    t: float
    beta: OrderParam
    model: IntensityModel = field(default_factory=Linear)

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 0:
            raise DomainError('n must be a nonnegative integer', {'n': self.n})
        if not (math.isfinite(self.t) and self.t >= 0):
            raise DomainError('t must be finite and nonnegative', {'t': self.t})
        if not isinstance(self.model, IntensityModel):
            raise DomainError('model must be an IntensityModel', {'model': self.model})
        object.__setattr__(self, 'n', int(self.n))
        object.__setattr__(self, 't', float(self.t))
        object.__setattr__(self, 'beta', as_order(self.beta))

    def to_dict(self) -> dict:
        return {'n': self.n, 't': self.t, 'beta': self.beta.beta, 'model': self.model.label()}


def poisson_log_pmf(n, lam):
    """log(e^-lam lam^n / n!) evaluated as n log lam - lam - log n!."""
    n = np.asarray(n, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if np.any(n < 0) or np.any(lam < 0):
        raise DomainError('poisson_log_pmf needs n >= 0 and lam >= 0')
    return xlogy(n, lam) - lam - gammaln(n + 1.0)


def _peak(model: IntensityModel, n: int, t_beta: float):
    """Saddle point z0 = Lambda^-1(n) / t^beta and the peak width in z."""
    z0 = float(model.invert(float(n))) / t_beta
    return z0, z0 / (model.c * math.sqrt(n))


def _initial_report(query: MarginalQuery) -> QuadratureReport:
    value = 1.0 if query.n == 0 else 0.0
    return QuadratureReport(value=value, abs_err_est=0.0, z_max=0.0, n_evals=0,
                            meta={'query': query.to_dict()})


def _weighted_integral(
    log_factor: Callable[[np.ndarray], np.ndarray],
    beta: float,
    peaks: Sequence[tuple],
    tol: float,
    cfg: SeriesEvalConfig,
    max_evals: int,
    context: dict,
) -> QuadratureReport:
    """Integrate exp(log_factor(z)) * M_beta(z) over [0, inf).

    ``peaks`` lists (z0, sigma) pairs used to seed panel boundaries. The
    tail beyond z_max is bounded by tol/10 and the M_beta truncation error
    by abs_tol * z_max; the quadrature gets what remains of ``tol``.
    """
    def integrand(z):
        weight = mwright_density(beta, z, cfg)
        factor = np.exp(log_factor(z))
        if factor.ndim > 1:
            weight = weight[:, None]
        return factor * weight

    tail_tol = tol / 10.0
    start = max([z0 + _TAIL_START_SIGMAS * sigma for z0, sigma in peaks] + [1.0])
    z_max = tail_cutoff(integrand, start=start, tail_tol=tail_tol)
    series_err = cfg.abs_tol * z_max
    quad_tol = tol - tail_tol - series_err
    if quad_tol < 0.5 * tol:
        raise ToleranceNotMet('series truncation error leaves no room for quadrature',
                              dict(context, tol=tol, series_err_est=series_err))

    breakpoints = list(np.linspace(0.0, z_max, 9))
    for z0, sigma in peaks:
        breakpoints.extend(breakpoints_around(z0, sigma, multiples=_PEAK_MULTIPLES))
    try:
        # headroom for the rounding term quad_vec adds to its error estimate
        report = adaptive_quad(integrand, 0.0, z_max, tol=0.9 * quad_tol, breakpoints=breakpoints,
                               max_evals=max_evals)
    except ToleranceNotMet as exc:
        raise ToleranceNotMet(str(exc), dict(context, **exc.context)) from exc

    logger.debug('weighted integral %s: z_max=%g, %d evaluations', context, z_max, report.n_evals)
    return QuadratureReport(value=report.value, abs_err_est=report.abs_err_est + tail_tol,
                            z_max=z_max, n_evals=report.n_evals, series_err_est=series_err,
                            meta={'query': context})


def marginal(query: MarginalQuery, tol: float = DEFAULT_TOL,
             cfg: Optional[SeriesEvalConfig] = None, max_evals: int = MAX_EVALS) -> QuadratureReport:
    """P_beta(n, t) = int_0^inf Pois(n; Lambda(z t^beta)) M_beta(z) dz.

    The Poisson factor is evaluated in log space; panels are seeded around
    the saddle point z0 = Lambda^-1(n) / t^beta. At t = 0 the initial values
    P(0, 0) = 1 and P(n, 0) = 0 are returned without quadrature.

    Args:
        query: count, time, order and intensity.
        tol: absolute tolerance on the value, in (0, 1).
        cfg: series limits for M_beta.
        max_evals: integrand evaluation budget.

    Returns:
        QuadratureReport with the value, error estimates and z_max.

    Raises:
        ToleranceNotMet: when the error estimate stays above tol.
    """
    cfg = cfg or DEFAULT_SERIES
    b = query.beta.require_fractional()
    if not 0 < tol < 1:
        raise DomainError('tol must lie in (0, 1)', {'tol': tol})
    if query.t == 0:
        return _initial_report(query)

    n, model = query.n, query.model
    t_beta = query.t ** b

    def log_factor(z):
        return poisson_log_pmf(n, model.cumulative(z * t_beta))

    peaks = [_peak(model, n, t_beta)] if n > 0 else []
    report = _weighted_integral(log_factor, b, peaks, tol, cfg, max_evals, query.to_dict())
    if report.total_err_est > tol:
        raise ToleranceNotMet('marginal error estimate exceeds tol',
                              dict(query.to_dict(), tol=tol, err=report.total_err_est))
    return report


def marginal_subordination(n: int, t: float, beta: OrderLike, tol: float = DEFAULT_TOL,
                           cfg: Optional[SeriesEvalConfig] = None,
                           max_evals: int = MAX_EVALS) -> QuadratureReport:
    """Homogeneous marginal (t^(n b) / n!) int_0^inf z^n e^(-z t^b) M_b(z) dz.

    The prefactor is kept outside the integrand and combined in logs, so
    this route shares no bookkeeping with :func:`marginal` beyond M_b.
    """
    cfg = cfg or DEFAULT_SERIES
    query = MarginalQuery(n=n, t=t, beta=as_order(beta), model=Linear(1.0))
    b = query.beta.require_fractional()
    if query.t == 0:
        return _initial_report(query)

    t_beta = query.t ** b
    log_prefactor = query.n * math.log(t_beta) - math.lgamma(query.n + 1.0)

    def log_factor(z):
        return xlogy(query.n, z) - z * t_beta + log_prefactor

    peaks = []
    if query.n > 0:
        z0 = query.n / t_beta
        peaks.append((z0, z0 / math.sqrt(query.n)))
    report = _weighted_integral(log_factor, b, peaks, tol, cfg, max_evals, query.to_dict())
    if report.total_err_est > tol:
        raise ToleranceNotMet('subordination integral error estimate exceeds tol',
                              dict(query.to_dict(), tol=tol, err=report.total_err_est))
    return report


def fpp_series_oracle(n: int, t: float, beta: OrderLike, cfg: Optional[SeriesEvalConfig] = None) -> float:
    """Closed-form series for the homogeneous (lambda = 1) marginal.

    P_b(n, t) = sum_k (-1)^k C(n+k, n) x^(n+k) / Gamma(b(n+k)+1), x = t^b.
    C(n+k, n) x^(n+k) is built by a running product in extended precision,
    so each term carries only the few ulp of its Gamma value. The sum is
    exact (fsum), leaving about eps * sqrt(sum term^2) of independent
    rounding; PrecisionLoss is raised when that bound exceeds
    ORACLE_ERROR_TOL or the cancellation ratio passes the guard.
    """
    cfg = cfg or DEFAULT_SERIES
    b = as_order(beta).require_fractional()
    if isinstance(n, bool) or int(n) != n or not 0 <= n <= ORACLE_MAX_N:
        raise DomainError(f'oracle n must be an integer in [0, {ORACLE_MAX_N}]', {'n': n})
    if not (math.isfinite(t) and t >= 0):
        raise DomainError('t must be finite and nonnegative', {'t': t})
    n = int(n)
    if t == 0:
        return 1.0 if n == 0 else 0.0

    x = t ** b
    log_x = math.log(x)
    k = np.arange(cfg.max_terms, dtype=float)
    # magnitudes only decide where to stop
    log_terms = ((n + k) * log_x - gammaln(n + 1.0) + gammaln(n + k + 1.0) - gammaln(k + 1.0)
                 - gammaln(b * (k + n) + 1.0))
    peak = int(np.argmax(log_terms))
    below = np.flatnonzero((log_terms < math.log(ORACLE_TERM_TOL)) & (k > peak))
    if below.size == 0:
        raise NonConvergence('oracle series did not converge within max_terms',
                             {'n': n, 't': t, 'beta': b, 'max_terms': cfg.max_terms})
    count = max(int(below[0]), 1)

    wide = np.longdouble
    m = np.arange(n + 1, n + count, dtype=wide)
    steps = wide(x) * m / (m - n)
    with np.errstate(over='ignore', under='ignore', invalid='ignore'):
        binomial_powers = np.concatenate([[wide(x) ** n], wide(x) ** n * np.cumprod(steps)])
        gammas = gamma(b * np.arange(n, n + count, dtype=float) + 1.0).astype(wide)
        magnitudes = (binomial_powers / gammas).astype(float)
    terms = np.where(k[:count] % 2 == 0, 1.0, -1.0) * magnitudes
    if not np.all(np.isfinite(terms)):
        raise PrecisionLoss('oracle series terms overflow; use a smaller t',
                            {'n': n, 't': t, 'beta': b})
    total = float(compensated_sum(terms))

    largest = float(np.max(np.abs(terms)))
    with np.errstate(over='ignore'):
        rounding = ORACLE_ULPS * np.finfo(float).eps * math.sqrt(float(np.sum(terms ** 2)))
    if largest / max(abs(total), 1.0) > cfg.cancellation_guard or rounding > ORACLE_ERROR_TOL:
        raise PrecisionLoss('oracle series cancels beyond the guard; use a smaller t',
                            {'n': n, 't': t, 'beta': b, 'largest_term': largest,
                             'rounding_bound': rounding})
    return total


def _table_peaks(model: IntensityModel, t_betas: np.ndarray, n_values: np.ndarray) -> List[tuple]:
    """Saddle points seeding the panels of a table over times and counts.

    Counts are sampled geometrically; only the later times are used, since
    at small t the saddle point sits far out in the tail of M_beta.
    """
    counts = n_values[n_values >= 1]
    if counts.size == 0:
        return []
    seeds = np.unique(np.round(np.geomspace(counts.min(), counts.max(), min(counts.size, 24))).astype(int))
    late = t_betas[t_betas >= t_betas.max() * _TABLE_SEED_FRACTION]
    if late.size > _TABLE_SEED_TIMES:
        late = late[np.unique(np.linspace(0, late.size - 1, _TABLE_SEED_TIMES).astype(int))]
    return [_peak(model, int(n), float(t_beta)) for t_beta in late for n in seeds]


def _table_report(times: np.ndarray, n_values: np.ndarray, beta: float, model: IntensityModel,
                  tol: float, cfg: SeriesEvalConfig, max_evals: int, context: dict) -> QuadratureReport:
    """One vector quadrature for P_beta(n, t) over positive times x counts, flattened row-major."""
    t_betas = times ** beta
    log_norm = gammaln(n_values + 1.0)

    def log_factor(z):
        lam = np.asarray(model.cumulative(z[:, None] * t_betas[None, :]))
        logs = xlogy(n_values[None, None, :], lam[:, :, None]) - lam[:, :, None] - log_norm[None, None, :]
        return logs.reshape(z.size, -1)

    report = _weighted_integral(log_factor, beta, _table_peaks(model, t_betas, n_values),
                                tol, cfg, max_evals, context)
    if np.max(report.abs_err_est) + report.series_err_est > tol:
        raise ToleranceNotMet('table error estimate exceeds tol',
                              dict(context, tol=tol, err=float(np.max(report.abs_err_est))))
    return report


def marginal_table(times: Sequence[float], beta: OrderLike, model: Optional[IntensityModel] = None,
                   n_values: Sequence[int] = (0,), tol: float = DEFAULT_TOL,
                   cfg: Optional[SeriesEvalConfig] = None, max_evals: int = MAX_EVALS) -> np.ndarray:
    """P_beta(n, t) for every time and count, sharing quadrature nodes.

    Args:
        times: nonnegative times; t = 0 rows hold the initial values.
        beta: order in (0, 1).
        model: intensity, Linear(1) by default.
        n_values: nonnegative counts.
        tol: absolute tolerance met by every entry.

    Returns:
        Array of shape (len(times), len(n_values)).
    """
    cfg = cfg or DEFAULT_SERIES
    model = model or Linear(1.0)
    b = as_order(beta).require_fractional()
    t_arr = np.asarray(times, dtype=float).reshape(-1)
    counts = np.asarray(n_values).reshape(-1)
    if t_arr.size == 0 or counts.size == 0:
        raise DomainError('marginal_table needs at least one time and one count')
    if not np.all(np.isfinite(t_arr)) or np.any(t_arr < 0):
        raise DomainError('times must be finite and nonnegative', {'t': float(t_arr.min())})
    if np.any(counts < 0) or np.any(counts != np.round(counts)):
        raise DomainError('counts must be nonnegative integers', {'n': counts.tolist()})
    counts = counts.astype(float)

    table = np.where(counts[None, :] == 0, 1.0, 0.0) * np.ones((t_arr.size, 1))
    live = t_arr > 0
    if np.any(live):
        context = {'beta': b, 'model': model.label(), 'times': int(live.sum()),
                   'n_values': counts.astype(int).tolist()}
        report = _table_report(t_arr[live], counts, b, model, tol, cfg, max_evals, context)
        table[live] = np.asarray(report.value).reshape(int(live.sum()), counts.size)
    return table


def distribution(t: float, beta: OrderLike, model: Optional[IntensityModel] = None, n_max: int = 40,
                 tol: float = DEFAULT_TOL, cfg: Optional[SeriesEvalConfig] = None,
                 max_evals: int = MAX_EVALS) -> List[QuadratureReport]:
    """P_beta(n, t) for n = 0..n_max from one quadrature with shared nodes.

    Args:
        t: time, >= 0.
        beta: order in (0, 1).
        model: intensity, Linear(1) by default.
        n_max: largest count.
        tol: absolute tolerance met by every component.

    Returns:
        One QuadratureReport per n, each tagged with its query in ``meta``.
    """
    cfg = cfg or DEFAULT_SERIES
    model = model or Linear(1.0)
    if isinstance(n_max, bool) or int(n_max) != n_max or n_max < 0:
        raise DomainError('n_max must be a nonnegative integer', {'n_max': n_max})
    query = MarginalQuery(n=0, t=t, beta=as_order(beta), model=model)
    b = query.beta.require_fractional()
    n_values = np.arange(int(n_max) + 1, dtype=float)
    if query.t == 0:
        return [_initial_report(MarginalQuery(int(n), 0.0, query.beta, model)) for n in n_values]

    context = {'t': query.t, 'beta': b, 'model': model.label(), 'n_max': int(n_max)}
    report = _table_report(np.array([query.t]), n_values, b, model, tol, cfg, max_evals, context)
    reports = report.components()
    for n, item in zip(n_values, reports):
        item.meta['query'] = dict(context, n=int(n))
    return reports


@dataclass(frozen=True)
class TruncatedDistribution:
    """P_beta(n, t) for n = 0..n_max plus a bound on the mass beyond n_max."""

    reports: List[QuadratureReport]
    tail_bound: float

    @property
    def n_max(self) -> int:
        return len(self.reports) - 1

    @property
    def total(self) -> float:
        return float(compensated_sum([report.value for report in self.reports]))


def poisson_tail_mass(t: float, beta: OrderLike, model: IntensityModel, n_max: int,
                      tol: float = 1e-10, cfg: Optional[SeriesEvalConfig] = None) -> float:
    """Upper estimate of int P(Pois(Lambda(z t^b)) > n_max) M_b(z) dz."""
    cfg = cfg or DEFAULT_SERIES
    b = as_order(beta).require_fractional()
    if t == 0:
        return 0.0
    t_beta = t ** b

    def integrand(z):
        return gammainc(n_max + 1.0, model.cumulative(z * t_beta)) * mwright_density(b, z, cfg)

    z_max = tail_cutoff(integrand, start=1.0, tail_tol=tol)
    report = adaptive_quad(integrand, 0.0, z_max, tol=tol, breakpoints=np.linspace(0.0, z_max, 9))
    return report.value + report.abs_err_est + tol


def truncated_distribution(t: float, beta: OrderLike, model: Optional[IntensityModel] = None,
                           tol: float = DEFAULT_TOL, tail_tol: float = 1e-8,
                           cfg: Optional[SeriesEvalConfig] = None,
                           max_n: int = 8192) -> TruncatedDistribution:
    """Distribution with n_max doubled until the neglected mass is below tail_tol."""
    model = model or Linear(1.0)
    if not tail_tol > 0:
        raise DomainError('tail_tol must be positive', {'tail_tol': tail_tol})
    n_max = 16
    while True:
        bound = poisson_tail_mass(t, beta, model, n_max, tol=tail_tol / 10.0, cfg=cfg)
        if bound < tail_tol:
            break
        if n_max >= max_n:
            raise ToleranceNotMet('Poisson tail does not fall below tail_tol',
                                  {'t': t, 'model': model.label(), 'n_max': n_max, 'tail': bound})
        n_max *= 2
    logger.debug('truncated distribution t=%g: n_max=%d, tail bound %.3g', t, n_max, bound)
    return TruncatedDistribution(reports=distribution(t, beta, model, n_max, tol, cfg), tail_bound=bound)

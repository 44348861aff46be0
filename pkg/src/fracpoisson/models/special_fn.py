"""M-Wright function, one-sided stable density and inverse stable subordinator density."""

from dataclasses import dataclass
from typing import Optional, Tuple, Union
import logging
import math

import numpy as np
from scipy.integrate import fixed_quad, quad_vec
from scipy.special import gamma, gammaln

from ..errors import DomainError, NonConvergence, PrecisionLoss, ToleranceNotMet
from .quadrature import QuadratureReport, adaptive_quad, tail_cutoff
from .summation import cancellation_ratio, compensated_sum, rounding_bound

logger = logging.getLogger(__name__)

# Largest |term|/|sum| at which the series still serves as an integration
# weight; beyond it mwright_density switches to the integral representation.
DENSITY_SWITCH_RATIO = 1e4

# exp(-_PHI_CUTOFF) bounds the relative size of the angular integrand
# beyond the truncation angle of mwright_integral.
_PHI_CUTOFF = 45.0
_GAUSS_NODES = 64
_LOG_TINY = math.log(np.finfo(float).tiny)



@dataclass(frozen=True)
class OrderParam:
    """Fractional order beta in (0, 1]."""

    beta: float

    def __post_init__(self):
        if not (isinstance(self.beta, (int, float)) and math.isfinite(self.beta)):
            raise DomainError('beta must be a finite real number', {'beta': self.beta})
        if not 0.0 < self.beta <= 1.0:
            raise DomainError('beta must lie in (0, 1]', {'beta': self.beta})

    @property
    def is_degenerate(self) -> bool:
        return self.beta == 1.0

    def require_fractional(self) -> float:
        """Return beta, rejecting the degenerate order beta = 1."""
        if self.is_degenerate:
            raise DomainError('series evaluation requires beta < 1 (M_1 is degenerate)',
                              {'beta': self.beta})
        return self.beta


OrderLike = Union[OrderParam, float]


def as_order(beta: OrderLike) -> OrderParam:
    if isinstance(beta, OrderParam):
        return beta
    return OrderParam(float(beta))


@dataclass(frozen=True)
class SeriesEvalConfig:
    """Truncation and precision limits for the alternating series."""

    max_terms: int = 600
    abs_tol: float = 1e-15
    cancellation_guard: float = 1e8

    def __post_init__(self):
        if int(self.max_terms) != self.max_terms or self.max_terms < 1:
            raise DomainError('max_terms must be a positive integer', {'max_terms': self.max_terms})
        if not self.abs_tol > 0:
            raise DomainError('abs_tol must be positive', {'abs_tol': self.abs_tol})
        if not self.cancellation_guard >= 1:
            raise DomainError('cancellation_guard must be at least 1',
                              {'cancellation_guard': self.cancellation_guard})

    @classmethod
    def from_settings(cls, settings) -> 'SeriesEvalConfig':
        return cls(
            max_terms=settings.series_max_terms,
            abs_tol=settings.series_abs_tol,
            cancellation_guard=settings.cancellation_guard,
        )


DEFAULT_SERIES = SeriesEvalConfig()


def _sinpi(x: np.ndarray) -> np.ndarray:
    """sin(pi x), exactly zero at integers."""
    reduced = x - 2.0 * np.round(0.5 * x)
    return np.where(reduced == np.round(reduced), 0.0, np.sin(np.pi * reduced))


def _as_array(values, name: str, positive: bool) -> Tuple[np.ndarray, bool]:
    array = np.asarray(values, dtype=float)
    bad = ~np.isfinite(array) | ((array <= 0) if positive else (array < 0))
    if np.any(bad):
        bound = '> 0' if positive else '>= 0'
        raise DomainError(f'{name} must be finite and {bound}',
                          {name: float(array[bad].flat[0])})
    return array, array.ndim == 0


def _finish(values: np.ndarray, scalar: bool):
    return float(values) if scalar else values


def _truncation_points(log_coef: np.ndarray, x: np.ndarray, offset: int,
                       cfg: SeriesEvalConfig) -> Tuple[np.ndarray, np.ndarray]:
    """Number of terms needed per argument, plus log of the largest term bound.

    The bound on term j is exp(log_coef[j-1]) * x**(j-1+offset); the series is
    cut before the first term past the peak whose bound is below abs_tol.
    A value of -1 marks arguments that need more than max_terms terms.
    """
    j = np.arange(1, log_coef.size + 1)
    with np.errstate(divide='ignore'):
        log_x = np.log(x)
    powers = np.where(x[:, None] > 0, (j - 1 + offset) * log_x[:, None],
                      np.where(j - 1 + offset == 0, 0.0, -np.inf))
    log_bound = log_coef[None, :] + powers
    peak = np.argmax(log_bound, axis=1)
    below = (log_bound < math.log(cfg.abs_tol)) & (j[None, :] - 1 > peak[:, None])
    found = below.any(axis=1)
    first = np.argmax(below, axis=1)
    needed = np.where(found, first, -1)
    return needed, log_bound.max(axis=1)


def _series_terms(log_coef: np.ndarray, coef: np.ndarray, signs: np.ndarray,
                  x: np.ndarray, offset: int, n_terms: int) -> np.ndarray:
    """Terms signs[j] * coef[j] * x**(j-1+offset) / (j-1)! for j = 1..n_terms.

    Powers are built by running products; entries that overflow fall back to
    the log form, which only happens for terms far below the tolerance.
    """
    m = x.size
    steps = x[:, None] / np.arange(1, n_terms)[None, :]
    with np.errstate(over='ignore', invalid='ignore', under='ignore'):
        powers = np.concatenate([np.ones((m, 1)), np.cumprod(steps, axis=1)], axis=1)
        if offset:
            powers = powers * x[:, None] ** offset
        terms = signs[None, :n_terms] * coef[None, :n_terms] * powers
    bad = ~np.isfinite(terms)
    if np.any(bad):
        j = np.arange(1, n_terms + 1)
        with np.errstate(divide='ignore', under='ignore'):
            log_x = np.log(x)
            log_terms = log_coef[None, :n_terms] + (j - 1 + offset) * log_x[:, None]
            fallback = signs[None, :n_terms] * np.exp(log_terms)
        terms = np.where(bad, np.nan_to_num(fallback, nan=0.0), terms)
    return terms


def _mwright_series(beta: float, z: np.ndarray, cfg: SeriesEvalConfig):
    """Sum the M-Wright series for every z.

    Returns (values, ratios, rounding, converged) without raising so that
    callers can decide between raising and switching to the integral
    representation. ``rounding`` bounds the floating-point error of each sum.
    """
    j = np.arange(1, cfg.max_terms + 1)
    # |coefficient| of z^(j-1) without the 1/(j-1)! carried by the running product
    log_coef = gammaln(beta * j) - gammaln(j) - math.log(math.pi)
    needed, log_peak = _truncation_points(log_coef, z, 0, cfg)

    converged = needed >= 0
    # Arguments whose largest term bound already exceeds the guard by a wide
    # margin cannot pass the cancellation check; skip them to avoid overflow.
    hopeless = log_peak > math.log(cfg.cancellation_guard) + 10.0
    active = converged & ~hopeless
    values = np.full(z.shape, np.nan)
    ratios = np.full(z.shape, np.inf)
    rounding = np.full(z.shape, np.inf)
    if np.any(active):
        n_terms = max(int(needed[active].max()), 1)
        with np.errstate(over='ignore'):
            coef = gamma(beta * j[:n_terms]) / math.pi
        signs = _sinpi(beta * j[:n_terms]) * np.where(j[:n_terms] % 2 == 1, 1.0, -1.0)
        terms = _series_terms(log_coef, coef, signs, z[active], 0, n_terms)
        total = compensated_sum(terms, axis=1)
        values[active] = total
        ratios[active] = cancellation_ratio(terms, total, axis=1)
        rounding[active] = rounding_bound(terms, axis=1)
    return values, ratios, rounding, converged


def _check_series(name: str, beta: float, x: np.ndarray, values: np.ndarray, ratios: np.ndarray,
                  converged: np.ndarray, cfg: SeriesEvalConfig) -> None:
    if not np.all(converged):
        bad = float(x[~converged].flat[0])
        raise NonConvergence(f'{name} series did not converge within max_terms',
                             {'beta': beta, 'argument': bad, 'max_terms': cfg.max_terms})
    lossy = ratios > cfg.cancellation_guard
    if np.any(lossy):
        bad = float(x[lossy].flat[0])
        raise PrecisionLoss(f'{name} series cancels beyond the guard',
                            {'beta': beta, 'argument': bad,
                             'ratio': float(ratios[lossy].flat[0]),
                             'cancellation_guard': cfg.cancellation_guard})
    negative = values < -cfg.abs_tol
    if np.any(negative):
        bad = float(x[negative].flat[0])
        raise PrecisionLoss(f'{name} series returned a negative density value',
                            {'beta': beta, 'argument': bad, 'value': float(values[negative].flat[0])})


def mwright(beta: OrderLike, z, cfg: Optional[SeriesEvalConfig] = None):
    """M-Wright (Mainardi) function M_beta(z) from its power series.

    Where the rounding bound eps * sum|term| of a sum exceeds
    ``cfg.abs_tol``, the value is taken from the integral representation
    instead, so every returned value is within abs_tol of M_beta(z).

    Args:
        beta: order in (0, 1).
        z: scalar or array of arguments, all >= 0.
        cfg: series limits; defaults to DEFAULT_SERIES.

    Returns:
        A float for scalar input, otherwise an array shaped like ``z``.

    Raises:
        PrecisionLoss: once the alternating series cancels past
            ``cfg.cancellation_guard``; use :func:`mwright_density` for
            arguments in that regime.
        NonConvergence: when max_terms terms do not reach abs_tol.
    """
    cfg = cfg or DEFAULT_SERIES
    b = as_order(beta).require_fractional()
    array, scalar = _as_array(z, 'z', positive=False)
    flat = array.reshape(-1)
    values, ratios, rounding, converged = _mwright_series(b, flat, cfg)
    inexact = converged & (ratios <= cfg.cancellation_guard) & (rounding > cfg.abs_tol)
    if np.any(inexact):
        logger.debug('M-Wright beta=%g: rounding bound above abs_tol at %d arguments',
                     b, int(inexact.sum()))
        values[inexact] = mwright_integral(b, flat[inexact], 1e-12, cfg.abs_tol)
    _check_series('M-Wright', b, flat, values, ratios, converged, cfg)
    return _finish(values.reshape(array.shape), scalar)


def _log_sinc(x: np.ndarray) -> np.ndarray:
    """log(sin(x) / x), exact zero at x = 0."""
    with np.errstate(divide='ignore'):
        return np.log(np.sinc(x / math.pi))


def _log_a_excess(beta: float, phi: np.ndarray) -> np.ndarray:
    """log(A(phi) / A(0)) from the log-sinc form, which has no cancellation at phi = 0."""
    return ((_log_sinc(beta * phi) - _log_sinc(phi)) / (1.0 - beta)
            + _log_sinc((1.0 - beta) * phi) - _log_sinc(beta * phi))


def mwright_integral(beta: OrderLike, z, tol: float = 1e-12, abs_tol: float = 0.0):
    """M_beta(z) from its positive integral representation.

    With A(phi) = (sin(b phi)/sin phi)^(1/(1-b)) sin((1-b) phi)/sin(b phi),
    M_b(z) = z^(b/(1-b)) / (pi (1-b)) * int_0^pi A exp(-z^(1/(1-b)) A) dphi.
    The integrand is positive, so there is no cancellation at large z; the
    exponential is factored out at A(0) and the result assembled in logs.
    Each value is accurate to max(tol * M_b(z), abs_tol).
    """
    b = as_order(beta).require_fractional()
    array, scalar = _as_array(z, 'z', positive=False)
    if not tol > 0 or abs_tol < 0:
        raise DomainError('tol must be positive and abs_tol nonnegative', {'tol': tol, 'abs_tol': abs_tol})
    flat = array.reshape(-1)
    out = np.zeros(flat.shape)
    positive = flat > 0
    if np.any(positive):
        out[positive] = _mwright_integral_positive(b, flat[positive], tol, abs_tol)
    zero = ~positive
    if np.any(zero):
        out[zero] = 1.0 / gamma(1.0 - b)
    return _finish(out.reshape(array.shape), scalar)


def _mwright_integral_positive(beta: float, z: np.ndarray, tol: float, abs_tol: float) -> np.ndarray:
    scale = z ** (1.0 / (1.0 - beta))
    a0 = (1.0 - beta) * beta ** (beta / (1.0 - beta))
    c = scale * a0
    # log(A(phi) / A(0)) >= beta phi^2 / 2, so the integrand is below exp(-_PHI_CUTOFF) past phi_max
    with np.errstate(divide='ignore'):
        phi_max = np.minimum(math.pi, np.sqrt(2.0 * _PHI_CUTOFF / (beta * c)))
    # log of the factor turning the reduced integral J into M
    log_unit = ((beta / (1.0 - beta)) * np.log(z) - math.log(math.pi * (1.0 - beta)) - c + math.log(a0))
    # the reduced integrand exp(d - c expm1(d)) never exceeds exp(peak)
    with np.errstate(divide='ignore'):
        peak = np.where(c < 1.0, c - 1.0 - np.log(c), 0.0)
    out = np.zeros(z.shape)
    live = log_unit + np.log(phi_max) + peak > _LOG_TINY
    if not np.any(live):
        return out
    z, c, phi_max, log_unit = z[live], c[live], phi_max[live], log_unit[live]

    def reduced(s, c_col, phi_col):
        phi = phi_col * s
        d = _log_a_excess(beta, phi)
        with np.errstate(over='ignore', invalid='ignore'):
            values = phi_col * np.exp(d - c_col * np.expm1(d))
        return np.nan_to_num(values, nan=0.0, posinf=0.0)

    coarse, _ = fixed_quad(reduced, 0.0, 1.0, args=(c[:, None], phi_max[:, None]), n=_GAUSS_NODES)
    fine, _ = fixed_quad(reduced, 0.0, 1.0, args=(c[:, None], phi_max[:, None]), n=2 * _GAUSS_NODES)
    with np.errstate(over='ignore'):
        target = np.maximum(tol * np.abs(fine), abs_tol * np.exp(-log_unit))
    for index in np.flatnonzero(np.abs(fine - coarse) > target):
        logger.debug('M-Wright integral: adaptive refinement at z=%g', z[index])
        value, error, info = quad_vec(reduced, 0.0, 1.0, epsabs=float(target[index]), epsrel=tol,
                                      args=(c[index], phi_max[index]), full_output=True)
        if not info.success and error > target[index]:
            raise ToleranceNotMet('M-Wright integral did not reach its tolerance',
                                  {'beta': beta, 'z': float(z[index]), 'err': float(error)})
        fine[index] = value

    with np.errstate(divide='ignore', under='ignore'):
        out[live] = np.exp(log_unit + np.log(fine))
    return out


def mwright_density(beta: OrderLike, z, cfg: Optional[SeriesEvalConfig] = None):
    """M_beta(z) for use as an integration weight on [0, inf).

    The series is used where its cancellation ratio stays below
    DENSITY_SWITCH_RATIO (or the configured guard, if smaller) and its
    rounding bound below ``cfg.abs_tol``; the integral representation covers
    the remaining arguments, including those where M_beta underflows to 0.
    """
    cfg = cfg or DEFAULT_SERIES
    b = as_order(beta).require_fractional()
    array, scalar = _as_array(z, 'z', positive=False)
    flat = array.reshape(-1)
    values, ratios, rounding, converged = _mwright_series(b, flat, cfg)
    switch = min(DENSITY_SWITCH_RATIO, cfg.cancellation_guard)
    fallback = ~converged | (ratios > switch) | (rounding > cfg.abs_tol)
    if np.any(fallback):
        logger.debug('M-Wright beta=%g: %d of %d arguments use the integral route',
                     b, int(fallback.sum()), flat.size)
        values[fallback] = mwright_integral(b, flat[fallback], 1e-12, cfg.abs_tol)
    return _finish(np.maximum(values, 0.0).reshape(array.shape), scalar)


def g_beta(beta: OrderLike, u, cfg: Optional[SeriesEvalConfig] = None, use_identity: bool = True):
    """One-sided stable density g_beta(u) from its series in u^(-beta).

    For small u the alternating series cancels; with ``use_identity`` the
    value is taken from g_b(u) = b u^(-1-b) M_b(u^(-b)) instead, otherwise
    PrecisionLoss is raised.
    """
    cfg = cfg or DEFAULT_SERIES
    b = as_order(beta).require_fractional()
    array, scalar = _as_array(u, 'u', positive=True)
    flat = array.reshape(-1)
    w = flat ** (-b)

    j = np.arange(1, cfg.max_terms + 1)
    # coefficient of w^j / (j-1)! is Gamma(b j + 1) / (j pi)
    log_coef = gammaln(b * j + 1.0) - np.log(j) - gammaln(j) - math.log(math.pi)
    needed, log_peak = _truncation_points(log_coef, w, 1, cfg)
    converged = needed >= 0
    hopeless = log_peak > math.log(cfg.cancellation_guard) + 10.0
    active = converged & ~hopeless

    values = np.full(flat.shape, np.nan)
    ratios = np.full(flat.shape, np.inf)
    if np.any(active):
        n_terms = max(int(needed[active].max()), 1)
        jj = j[:n_terms]
        with np.errstate(over='ignore'):
            coef = gamma(b * jj + 1.0) / (jj * math.pi)
        signs = _sinpi(b * jj) * np.where(jj % 2 == 1, 1.0, -1.0)
        terms = _series_terms(log_coef, coef, signs, w[active], 1, n_terms)
        total = compensated_sum(terms, axis=1)
        values[active] = total / flat[active]
        ratios[active] = cancellation_ratio(terms, total, axis=1)

    unstable = ~converged | (ratios > cfg.cancellation_guard)
    if np.any(unstable):
        if not use_identity:
            _check_series('stable density', b, flat, values, ratios, converged, cfg)
        logger.debug('g_beta beta=%g: %d arguments use the M-Wright identity', b, int(unstable.sum()))
        small_u = flat[unstable]
        values[unstable] = b * small_u ** (-1.0 - b) * mwright_density(b, small_u ** (-b), cfg)
    _check_series('stable density', b, flat, values, np.ones_like(values), converged | unstable, cfg)
    return _finish(values.reshape(array.shape), scalar)


def h_beta(beta: OrderLike, t, x, cfg: Optional[SeriesEvalConfig] = None):
    """Density of the inverse stable subordinator at time t.

    h_b(t, x) = t / (b x^(1 + 1/b)) * g_b(t x^(-1/b)); t and x broadcast.
    """
    b = as_order(beta).require_fractional()
    t_arr, t_scalar = _as_array(t, 't', positive=True)
    x_arr, x_scalar = _as_array(x, 'x', positive=True)
    t_arr, x_arr = np.broadcast_arrays(t_arr, x_arr)
    g = np.asarray(g_beta(b, t_arr * x_arr ** (-1.0 / b), cfg))
    values = t_arr / (b * x_arr ** (1.0 + 1.0 / b)) * g
    return _finish(values, t_scalar and x_scalar)


def mwright_moment_exact(beta: OrderLike, k: int) -> float:
    """k-th moment of M_beta: k! / Gamma(beta k + 1)."""
    b = as_order(beta).require_fractional()
    if int(k) != k or k < 0:
        raise DomainError('moment order must be a nonnegative integer', {'k': k})
    return math.exp(math.lgamma(k + 1.0) - math.lgamma(b * k + 1.0))


def mwright_moment(beta: OrderLike, k: int, tol: float = 1e-9,
                   cfg: Optional[SeriesEvalConfig] = None) -> QuadratureReport:
    """k-th moment of M_beta by adaptive quadrature over [0, z_max]."""
    cfg = cfg or DEFAULT_SERIES
    b = as_order(beta).require_fractional()
    if int(k) != k or k < 0:
        raise DomainError('moment order must be a nonnegative integer', {'k': k})

    def integrand(z):
        return z ** k * mwright_density(b, z, cfg)

    z_max = tail_cutoff(integrand, start=1.0, tail_tol=tol / 10.0)
    report = adaptive_quad(integrand, 0.0, z_max, tol=tol, breakpoints=np.linspace(0.0, z_max, 9))
    return QuadratureReport(value=report.value, abs_err_est=report.abs_err_est, z_max=z_max,
                            n_evals=report.n_evals, series_err_est=cfg.abs_tol * z_max ** (k + 1))

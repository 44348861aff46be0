"""Dynamical scaling of n * P_beta(n, t) along n = Lambda(z0 t^beta)."""

from dataclasses import dataclass, field
from typing import Iterable, List, Optional
import logging
import math

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from ..config import DEFAULT_TOL
from ..errors import ConstraintError, DomainError
from .intensity import IntensityModel, PowerLaw
from .marginals import MarginalQuery, marginal
from .special_fn import DEFAULT_SERIES, OrderLike, OrderParam, SeriesEvalConfig, as_order, mwright_density

logger = logging.getLogger(__name__)

MAX_SCALING_N = 4096
CONSTRAINT_RTOL = 1e-9
DEFAULT_N_LIST = tuple(2 ** k for k in range(4, 13))


@dataclass(frozen=True)
class ScalingPoint:
    n: int
    t: float
    scaled_value: float
    limit_value: float
    abs_gap: float
    abs_err_est: float = 0.0

    def to_dict(self) -> dict:
        return {
            'n': self.n,
            't': self.t,
            'scaled_value': self.scaled_value,
            'limit_value': self.limit_value,
            'abs_gap': self.abs_gap,
        }


@dataclass(frozen=True)
class ScalingCurve:
    """Scaled marginals along one constraint curve, ordered by n."""

    beta: OrderParam
    model: IntensityModel
    z0: float
    points: List[ScalingPoint] = field(default_factory=list)

    def __post_init__(self):
        if not self.points:
            raise DomainError('a scaling curve needs at least one point')
        ns = [point.n for point in self.points]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise DomainError('scaling curve points must have strictly increasing n', {'n': ns})

    @property
    def gaps(self) -> List[float]:
        return [point.abs_gap for point in self.points]

    def point(self, n: int) -> ScalingPoint:
        for item in self.points:
            if item.n == n:
                return item
        raise KeyError(n)


@dataclass(frozen=True)
class SaddlePoint:
    """Steepest-descent quantities of f(z|t) = log Lambda(z t^b) - Lambda(z t^b)/n at z0."""

    beta: OrderParam
    model: IntensityModel
    z0: float
    n: int
    t: float
    f_value: float
    f_prime: float
    f_second: float
    saddle_value: float
    limit_value: float


def _check_z0(z0: float) -> float:
    if not (isinstance(z0, (int, float)) and math.isfinite(z0) and z0 > 0):
        raise DomainError('z0 must be a positive number', {'z0': z0})
    return float(z0)


def _check_n_list(n_list: Iterable[int]) -> List[int]:
    ns = list(n_list)
    if not ns:
        raise DomainError('n list must not be empty')
    for n in ns:
        if isinstance(n, bool) or int(n) != n or n < 1:
            raise DomainError('n values must be positive integers', {'n': n})
    ns = [int(n) for n in ns]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise DomainError('n values must be strictly increasing', {'n': ns})
    if ns[-1] > MAX_SCALING_N:
        raise DomainError(f'n must not exceed {MAX_SCALING_N}', {'n': ns[-1]})
    return ns


def solve_time(model: IntensityModel, beta: float, z0: float, n: int) -> float:
    """The t > 0 with Lambda(z0 t^beta) = n."""
    t = (float(model.invert(float(n))) / z0) ** (1.0 / beta)
    if not (math.isfinite(t) and t > 0):
        raise ConstraintError('constraint has no finite solution', {'n': n, 'z0': z0, 'beta': beta})
    miss = abs(float(model.cumulative(z0 * t ** beta)) - n)
    if miss > CONSTRAINT_RTOL * n:
        raise ConstraintError('constraint not met after inversion',
                              {'n': n, 'z0': z0, 'beta': beta, 't': t, 'miss': miss})
    return t


def _constraint_marginals(beta: float, model: IntensityModel, z0: float, ns: List[int],
                          tol: float, cfg: SeriesEvalConfig):
    for n in ns:
        t = solve_time(model, beta, z0, n)
        report = marginal(MarginalQuery(n, t, OrderParam(beta), model), tol, cfg)
        logger.debug('constraint point n=%d t=%.6g P=%.12g', n, t, report.value)
        yield n, t, report


def scaling_limit(beta: OrderLike, model: IntensityModel, z0: float,
                  cfg: Optional[SeriesEvalConfig] = None) -> float:
    """(z0 / c) * M_beta(z0)."""
    b = as_order(beta).require_fractional()
    return _check_z0(z0) / model.c * mwright_density(b, z0, cfg or DEFAULT_SERIES)


def scaling_curve(beta: OrderLike, model: IntensityModel, z0: float,
                  n_list: Iterable[int] = DEFAULT_N_LIST, tol: float = DEFAULT_TOL,
                  cfg: Optional[SeriesEvalConfig] = None) -> ScalingCurve:
    """n * P_beta(n, t) on n = Lambda(z0 t^beta) against its limit.

    Args:
        beta: order in (0, 1).
        model: intensity Lambda.
        z0: positive point of the limit (z0 / c) M_beta(z0).
        n_list: increasing counts, at most MAX_SCALING_N.
        tol: quadrature tolerance per marginal.

    Returns:
        ScalingCurve with one point per n.
    """
    cfg = cfg or DEFAULT_SERIES
    order = as_order(beta)
    b = order.require_fractional()
    z0 = _check_z0(z0)
    ns = _check_n_list(n_list)
    limit = scaling_limit(order, model, z0, cfg)

    points = []
    for n, t, report in _constraint_marginals(b, model, z0, ns, tol, cfg):
        scaled = n * report.value
        points.append(ScalingPoint(n=n, t=t, scaled_value=scaled, limit_value=limit,
                                   abs_gap=abs(scaled - limit), abs_err_est=n * report.total_err_est))
    return ScalingCurve(beta=order, model=model, z0=z0, points=points)


def corollary_curve(beta: OrderLike, r: float, z0: float, t_list: Iterable[float],
                    tol: float = DEFAULT_TOL, cfg: Optional[SeriesEvalConfig] = None) -> ScalingCurve:
    """t^(r b) * P_beta(n, t) for Lambda(x) = x^r against z0^(1-r)/r * M_beta(z0).

    Each requested t is rounded to the nearest integer n = z0^r t^(r b) and
    then re-solved exactly, so the points coincide with those of
    :func:`scaling_curve` for PowerLaw(r, 1) at the same n.
    """
    cfg = cfg or DEFAULT_SERIES
    order = as_order(beta)
    b = order.require_fractional()
    z0 = _check_z0(z0)
    model = PowerLaw(r, 1.0)

    ns = []
    for t in t_list:
        if not (math.isfinite(t) and t > 0):
            raise DomainError('t values must be positive', {'t': t})
        n = max(1, int(round(z0 ** model.r * t ** (model.r * b))))
        if ns and n <= ns[-1]:
            logger.warning('t=%g rounds to n=%d already on the curve; skipped', t, n)
            continue
        ns.append(n)
    ns = _check_n_list(ns)

    limit = z0 ** (1.0 - model.r) / model.r * mwright_density(b, z0, cfg)
    points = []
    for n, t, report in _constraint_marginals(b, model, z0, ns, tol, cfg):
        weight = t ** (model.r * b)
        scaled = weight * report.value
        points.append(ScalingPoint(n=n, t=t, scaled_value=scaled, limit_value=limit,
                                   abs_gap=abs(scaled - limit), abs_err_est=weight * report.total_err_est))
    return ScalingCurve(beta=order, model=model, z0=z0, points=points)


@dataclass(frozen=True)
class PoissonPoint:
    n: int
    t: float
    scaled_value: float


def poisson_degenerate(n_list: Iterable[int], z0: float) -> List[PoissonPoint]:
    """t^(1/2) * P_1(n, t) at t = n / z0 for the ordinary Poisson process."""
    z0 = _check_z0(z0)
    points = []
    for n in _check_n_list(n_list):
        t = n / z0
        log_value = 0.5 * math.log(t) + float(poisson.logpmf(n, t))
        points.append(PoissonPoint(n=n, t=t, scaled_value=math.exp(log_value)))
    return points


def saddle_point(beta: OrderLike, model: IntensityModel, n: int, z0: float,
                 cfg: Optional[SeriesEvalConfig] = None) -> SaddlePoint:
    """Evaluate f(z|t) and its derivatives at z0 on the constraint, plus the
    steepest-descent estimate (n/n!) e^(n f) sqrt(2 pi / (n |f''|)) M_beta(z0)
    of n * P_beta(n, t)."""
    cfg = cfg or DEFAULT_SERIES
    order = as_order(beta)
    b = order.require_fractional()
    z0 = _check_z0(z0)
    n = _check_n_list([n])[0]
    t = solve_time(model, b, z0, n)

    t_beta = t ** b
    x = z0 * t_beta
    lam = float(model.cumulative(x))
    rate = float(model.derivative(x))
    curvature = float(model.second_derivative(x))
    f_value = math.log(lam) - lam / n
    f_prime = t_beta * rate * (1.0 / lam - 1.0 / n)
    f_second = t_beta ** 2 * (curvature / lam - (rate / lam) ** 2 - curvature / n)

    m_value = mwright_density(b, z0, cfg)
    log_estimate = (math.log(n) - gammaln(n + 1.0) + n * f_value
                    + 0.5 * math.log(2.0 * math.pi / (n * -f_second)) + math.log(m_value))
    return SaddlePoint(beta=order, model=model, z0=z0, n=n, t=t, f_value=f_value, f_prime=f_prime,
                       f_second=f_second, saddle_value=float(np.exp(log_estimate)),
                       limit_value=z0 / model.c * m_value)

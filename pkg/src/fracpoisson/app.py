"""Command line for marginal tables, scaling curves and equation residuals."""

from functools import partial
from typing import Callable, Iterable, List, Mapping
import logging
import math
import sys

import click
import numpy as np

from .config import MAX_TOL, MIN_TOL, get_settings
from .errors import ConfigError, DomainError, NumericalError
from .models.fractional_ops import SUPPORTS, fnhpp_residual, kf_residual, make_grid
from .models.intensity import Linear, parse_model
from .models.marginals import MarginalQuery, marginal
from .models.scaling import MAX_SCALING_N, corollary_curve, poisson_degenerate, saddle_point, scaling_curve
from .models.special_fn import OrderParam, SeriesEvalConfig, mwright_density, mwright_moment, \
    mwright_moment_exact
from .tables import FORMATS, write_table

logger = logging.getLogger(__name__)

EXIT_DOMAIN = 2
EXIT_NUMERICAL = 3
T_RANGE_POINTS = 9
Z_RANGE_POINTS = 9
# Largest count accepted on the command line where no tighter limit applies.
MAX_COUNT = 10 ** 6


def _split_range(value: str):
    if '..' in value:
        lo, _, hi = value.partition('..')
        return float(lo), float(hi)
    return None


def _float_list(value: str) -> List[float]:
    return [float(item) for item in value.split(',') if item.strip()]


def parse_n_range(value: str, max_n: int = MAX_COUNT) -> List[int]:
    """Parse a count option.

    Args:
        value: ``a..b`` doubles from a up to b; otherwise a comma list of
            integers.
        max_n: largest count accepted.

    Returns:
        Sorted distinct counts.

    Raises:
        ValueError: for non-finite, negative, fractional or too large counts.
    """
    bounds = _split_range(value)
    if bounds is None:
        values = _float_list(value)
    else:
        lo, hi = bounds
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError('range bounds must be finite')
        if not 1 <= lo <= hi:
            raise ValueError('range must satisfy 1 <= a <= b')
        if hi > max_n:
            raise ValueError(f'counts must not exceed {max_n}')
        values = []
        current = lo
        while current <= hi:
            values.append(current)
            current *= 2
    if not values or any(not math.isfinite(v) or v < 0 or v != int(v) for v in values):
        raise ValueError('counts must be finite nonnegative integers')
    if max(values) > max_n:
        raise ValueError(f'counts must not exceed {max_n}')
    return sorted({int(v) for v in values})


scaled_counts = partial(parse_n_range, max_n=MAX_SCALING_N)


def parse_t_range(value: str, points: int = T_RANGE_POINTS) -> List[float]:
    """``a..b`` gives log-spaced points; otherwise a comma list."""
    bounds = _split_range(value)
    if bounds is None:
        values = _float_list(value)
    else:
        lo, hi = bounds
        if not 0 < lo <= hi:
            raise ValueError('range must satisfy 0 < a <= b')
        values = np.geomspace(lo, hi, points).tolist() if hi > lo else [lo]
    if not values or any(not np.isfinite(v) or v < 0 for v in values):
        raise ValueError('values must be finite and nonnegative')
    return sorted(set(values))


def parse_z_range(value: str) -> List[float]:
    """``a..b`` gives evenly spaced points; otherwise a comma list."""
    bounds = _split_range(value)
    if bounds is None:
        return parse_t_range(value)
    lo, hi = bounds
    if not 0 <= lo <= hi:
        raise ValueError('range must satisfy 0 <= a <= b')
    return np.linspace(lo, hi, Z_RANGE_POINTS).tolist() if hi > lo else [lo]


def parse_order(value: float) -> OrderParam:
    order = OrderParam(value)
    order.require_fractional()
    return order


def _converter(parse: Callable):
    def callback(ctx, param, value):
        if value is None:
            return None
        try:
            return parse(value)
        except (ValueError, OverflowError, DomainError) as exc:
            message = exc.describe() if isinstance(exc, DomainError) else str(exc)
            raise click.BadParameter(message, ctx=ctx, param=param) from exc
    return callback


beta_option = click.option('--beta', required=True, type=float, callback=_converter(parse_order),
                           help='Fractional order in (0, 1).')
model_option = click.option('--model', 'model', default='linear:lambda=1', show_default=True,
                            callback=_converter(parse_model),
                            help='powerlaw:r=<real>,scale=<real> or linear:lambda=<real>.')
z0_option = click.option('--z0', required=True, type=click.FloatRange(min=0, min_open=True),
                         help='Scaling variable z0 > 0.')


_OUTPUT_OPTIONS = (
    click.option('--tol', type=click.FloatRange(min=MIN_TOL, max=MAX_TOL, min_open=True, max_open=True),
                 default=None, help='Absolute tolerance (default FRACPOISSON_TOL or 1e-8).'),
    click.option('--format', 'fmt', type=click.Choice(FORMATS), default='csv', show_default=True),
    click.option('--output', '-o', type=click.Path(dir_okay=False, writable=True), default=None,
                 help='Write the table here instead of stdout.'),
)


def output_options(func):
    """Options shared by every subcommand."""
    for decorator in reversed(_OUTPUT_OPTIONS):
        func = decorator(func)
    return func


def _emit(table: str, compute: Callable[[float, SeriesEvalConfig], Iterable[Mapping]],
          tol, fmt: str, output) -> None:
    """Compute all rows, then write them; map failures to exit codes."""
    ctx = click.get_current_context()
    settings = ctx.obj['settings']
    tol = settings.tol if tol is None else tol
    cfg = SeriesEvalConfig.from_settings(settings)
    try:
        rows = list(compute(tol, cfg))
    except DomainError as exc:
        click.echo(f'error: {exc.describe()}', err=True)
        ctx.exit(EXIT_DOMAIN)
    except NumericalError as exc:
        click.echo(f'numerical failure in {table}: {exc.describe()}', err=True)
        ctx.exit(EXIT_NUMERICAL)
    with click.open_file(output or '-', 'w') as stream:
        write_table(table, rows, stream, fmt)
    logger.info('%s: wrote %d rows', table, len(rows))


@click.group()
@click.option('--verbose', '-v', count=True, help='Log progress to stderr (-vv for debug).')
@click.version_option(package_name='frac-poisson')
@click.pass_context
def main(ctx, verbose):
    """Fractional Poisson process marginals and dynamical scaling tables."""
    try:
        settings = get_settings()
    except ConfigError as exc:
        click.echo(f'configuration error: {exc.describe()}', err=True)
        ctx.exit(EXIT_DOMAIN)
    level = {0: settings.log_level, 1: 'INFO'}.get(verbose, 'DEBUG')
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format='%(levelname)s %(name)s: %(message)s')
    ctx.ensure_object(dict)
    ctx.obj['settings'] = settings


@main.command('mwright')
@beta_option
@click.option('--z', 'z_values', default='0', show_default=True, callback=_converter(parse_z_range),
              help='Comma list or a..b (evenly spaced).')
@output_options
def mwright_command(beta, z_values, tol, fmt, output):
    """M-Wright function M_beta(z)."""
    def compute(tol, cfg):
        values = mwright_density(beta, np.asarray(z_values), cfg)
        for z, value in zip(z_values, values):
            yield {'beta': beta.beta, 'z': z, 'value': value}
    _emit('mwright', compute, tol, fmt, output)


@main.command('marginals')
@beta_option
@model_option
@click.option('--t', 't_values', required=True, callback=_converter(parse_t_range),
              help='Comma list or a..b (log-spaced).')
@click.option('--n', 'n_values', default='0,1,2,4,8,16', show_default=True, callback=_converter(parse_n_range),
              help='Comma list or a..b (doubling).')
@output_options
def marginals_command(beta, model, t_values, n_values, tol, fmt, output):
    """Marginal probabilities P_beta(n, t)."""
    def compute(tol, cfg):
        max_evals = click.get_current_context().obj['settings'].max_evals
        for n in n_values:
            for t in t_values:
                report = marginal(MarginalQuery(n, t, beta, model), tol, cfg, max_evals)
                yield {'beta': beta.beta, 'model': model.label(), 't': t, 'n': n, 'value': report.value,
                       'abs_err_est': report.total_err_est, 'z_max': report.z_max,
                       'n_evals': report.n_evals}
    _emit('marginals', compute, tol, fmt, output)


def _curve_rows(curve):
    for point in curve.points:
        yield {'beta': curve.beta.beta, 'model': curve.model.label(), 'z0': curve.z0, **point.to_dict()}


@main.command('scaling')
@beta_option
@model_option
@z0_option
@click.option('--n', 'n_values', default='16..4096', show_default=True, callback=_converter(scaled_counts))
@output_options
def scaling_command(beta, model, z0, n_values, tol, fmt, output):
    """n * P_beta(n, t) along n = Lambda(z0 t^beta)."""
    def compute(tol, cfg):
        return _curve_rows(scaling_curve(beta, model, z0, n_values, tol, cfg))
    _emit('scaling', compute, tol, fmt, output)


@main.command('corollary')
@beta_option
@click.option('--r', required=True, type=click.FloatRange(min=0, min_open=True), help='Power-law exponent.')
@z0_option
@click.option('--t', 't_values', required=True, callback=_converter(parse_t_range),
              help='Comma list or a..b (log-spaced).')
@output_options
def corollary_command(beta, r, z0, t_values, tol, fmt, output):
    """t^(r beta) * P_beta(n, t) for Lambda(x) = x^r."""
    def compute(tol, cfg):
        return _curve_rows(corollary_curve(beta, r, z0, t_values, tol, cfg))
    _emit('corollary', compute, tol, fmt, output)


@main.command('residual')
@beta_option
@click.option('--model', 'model', default=None, callback=_converter(parse_model),
              help='Intensity for the general system; omit for the unit-rate equations.')
@click.option('--n', 'n_values', default='0', show_default=True, callback=_converter(parse_n_range))
@click.option('--h', type=click.FloatRange(min=0, min_open=True), default=1 / 64, show_default=True)
@click.option('--horizon', type=click.FloatRange(min=0, min_open=True), default=2.0, show_default=True)
@click.option('--support', type=click.Choice(SUPPORTS), default='half_line', show_default=True)
@output_options
def residual_command(beta, model, n_values, h, horizon, support, tol, fmt, output):
    """Caputo derivative of P_beta(n, .) against the forward equations."""
    def compute(tol, cfg):
        grid = make_grid(horizon, h)
        label = (model or Linear(1.0)).label()
        for n in n_values:
            if model is None:
                report = kf_residual(n, beta, grid, tol, cfg)
            else:
                report = fnhpp_residual(n, beta, model, grid, tol, cfg, support)
            for t, lhs, rhs in zip(grid.points, report.lhs, report.rhs):
                yield {'beta': beta.beta, 'model': label, 'n': n, 'h': grid.spacing, 't': t,
                       'lhs': lhs, 'rhs': rhs, 'residual': lhs - rhs}
    _emit('residual', compute, tol, fmt, output)


@main.command('poisson')
@z0_option
@click.option('--n', 'n_values', default='16..1024', show_default=True, callback=_converter(parse_n_range))
@output_options
def poisson_command(z0, n_values, tol, fmt, output):
    """t^(1/2) * P_1(n, t) at t = n / z0 for the ordinary Poisson process."""
    def compute(tol, cfg):
        for point in poisson_degenerate(n_values, z0):
            yield {'z0': z0, 'n': point.n, 't': point.t, 'scaled_value': point.scaled_value}
    _emit('poisson', compute, tol, fmt, output)


@main.command('moments')
@beta_option
@click.option('--k', 'k_values', default='0,1,2,3', show_default=True, callback=_converter(parse_n_range))
@output_options
def moments_command(beta, k_values, tol, fmt, output):
    """Moments of M_beta by quadrature against k! / Gamma(beta k + 1)."""
    def compute(tol, cfg):
        for k in k_values:
            report = mwright_moment(beta, k, tol, cfg)
            yield {'beta': beta.beta, 'k': k, 'value': report.value,
                   'exact': mwright_moment_exact(beta, k), 'abs_err_est': report.total_err_est}
    _emit('moments', compute, tol, fmt, output)


@main.command('saddle')
@beta_option
@model_option
@z0_option
@click.option('--n', 'n_values', default='16..4096', show_default=True, callback=_converter(scaled_counts))
@output_options
def saddle_command(beta, model, z0, n_values, tol, fmt, output):
    """Saddle-point quantities and the steepest-descent estimate of n * P_beta(n, t)."""
    def compute(tol, cfg):
        for n in n_values:
            point = saddle_point(beta, model, n, z0, cfg)
            yield {'beta': beta.beta, 'model': model.label(), 'z0': z0, 'n': n, 't': point.t,
                   'f_value': point.f_value, 'f_prime': point.f_prime, 'f_second': point.f_second,
                   'saddle_value': point.saddle_value, 'limit_value': point.limit_value}
    _emit('saddle', compute, tol, fmt, output)


if __name__ == '__main__':
    main()

"""Column schemas and CSV/JSON writers for command-line tables."""

from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, TextIO
import csv
import json
import numbers

from .errors import DomainError

SIGNIFICANT_DIGITS = 15
FORMATS = ('csv', 'json')


@dataclass(frozen=True)
class Column:
    name: str
    description: str


def _columns(*pairs) -> List[Column]:
    return [Column(name, description) for name, description in pairs]


TABLES: Dict[str, List[Column]] = {
    'mwright': _columns(
        ('beta', 'Fractional order'),
        ('z', 'Argument of M_beta'),
        ('value', 'M_beta(z)'),
    ),
    'marginals': _columns(
        ('beta', 'Fractional order'),
        ('model', 'Cumulative intensity'),
        ('t', 'Time'),
        ('n', 'Count'),
        ('value', 'P_beta(n, t)'),
        ('abs_err_est', 'Quadrature, tail and series error estimate'),
        ('z_max', 'Truncation point of the z integral'),
        ('n_evals', 'Integrand evaluations'),
    ),
    'scaling': _columns(
        ('beta', 'Fractional order'),
        ('model', 'Cumulative intensity'),
        ('z0', 'Scaling variable'),
        ('n', 'Count on the constraint curve'),
        ('t', 'Time solving n = Lambda(z0 t^beta)'),
        ('scaled_value', 'n * P_beta(n, t)'),
        ('limit_value', '(z0 / c) * M_beta(z0)'),
        ('abs_gap', '|scaled_value - limit_value|'),
    ),
    'residual': _columns(
        ('beta', 'Fractional order'),
        ('model', 'Cumulative intensity'),
        ('n', 'Count'),
        ('h', 'Grid spacing'),
        ('t', 'Grid point'),
        ('lhs', 'Caputo derivative of P_beta(n, .)'),
        ('rhs', 'Right-hand side of the forward equation'),
        ('residual', 'lhs - rhs'),
    ),
    'poisson': _columns(
        ('z0', 'Ratio n / t'),
        ('n', 'Count'),
        ('t', 'Time n / z0'),
        ('scaled_value', 't^(1/2) * P_1(n, t)'),
    ),
    'moments': _columns(
        ('beta', 'Fractional order'),
        ('k', 'Moment order'),
        ('value', 'Quadrature of z^k M_beta(z)'),
        ('exact', 'k! / Gamma(beta k + 1)'),
        ('abs_err_est', 'Quadrature error estimate'),
    ),
    'saddle': _columns(
        ('beta', 'Fractional order'),
        ('model', 'Cumulative intensity'),
        ('z0', 'Saddle point'),
        ('n', 'Count'),
        ('t', 'Time on the constraint'),
        ('f_value', 'f(z0|t)'),
        ('f_prime', "f'(z0|t)"),
        ('f_second', "f''(z0|t)"),
        ('saddle_value', 'Steepest-descent estimate of n * P_beta(n, t)'),
        ('limit_value', '(z0 / c) * M_beta(z0)'),
    ),
}
TABLES['corollary'] = TABLES['scaling']


def format_value(value) -> str:
    """Render a cell: floats with 15 significant digits, everything else via str."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, numbers.Integral):
        return str(int(value))
    if isinstance(value, numbers.Real):
        return f'{float(value):.{SIGNIFICANT_DIGITS}g}'
    return str(value)


def _json_value(value):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        return value
    if isinstance(value, numbers.Integral):
        return int(value)
    return float(format_value(value))


def _ordered(table: str, rows: Iterable[Mapping]) -> tuple:
    if table not in TABLES:
        raise DomainError(f'unknown table {table!r}')
    names = [column.name for column in TABLES[table]]
    ordered = []
    for row in rows:
        missing = [name for name in names if name not in row]
        if missing:
            raise DomainError(f'row is missing columns {missing}', {'table': table})
        ordered.append([row[name] for name in names])
    return names, ordered


def write_table(table: str, rows: Iterable[Mapping], stream: TextIO, fmt: str = 'csv') -> None:
    """Write rows as CSV (header plus rows) or as a JSON array of objects."""
    if fmt not in FORMATS:
        raise DomainError(f'format must be one of {FORMATS}', {'format': fmt})
    names, ordered = _ordered(table, rows)
    if fmt == 'csv':
        writer = csv.writer(stream, lineterminator='\n')
        writer.writerow(names)
        for row in ordered:
            writer.writerow([format_value(value) for value in row])
        return
    objects = [{name: _json_value(value) for name, value in zip(names, row)} for row in ordered]
    json.dump(objects, stream, indent=2)
    stream.write('\n')

"""Cumulative intensity functions Lambda(x) with closed-form inverses."""

from dataclasses import dataclass
from typing import Dict, List, Sequence
import math

import numpy as np

from ..errors import DomainError


def _positive_parameter(name: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value) \
            or value <= 0:
        raise DomainError(f'{name} must be a positive finite number', {name: value})
    return float(value)


class IntensityModel:
    """Base class for cumulative intensities Lambda with Lambda(0) = 0.

    Subclasses provide Lambda, its derivative lambda, the inverse of Lambda
    and the constant c for which x * lambda(x) / Lambda(x) -> c.
    """

    kind = 'abstract'

    def cumulative(self, x):
        raise NotImplementedError('Subclasses must implement cumulative')

    def derivative(self, x):
        raise NotImplementedError('Subclasses must implement derivative')

    def second_derivative(self, x):
        raise NotImplementedError('Subclasses must implement second_derivative')

    def invert(self, y):
        raise NotImplementedError('Subclasses must implement invert')

    @property
    def c(self) -> float:
        raise NotImplementedError('Subclasses must implement c')

    def parameters(self) -> Dict[str, float]:
        raise NotImplementedError('Subclasses must implement parameters')

    def label(self) -> str:
        """The model in the command-line syntax, e.g. ``linear:lambda=1``."""
        args = ','.join(f'{key}={value:.15g}' for key, value in self.parameters().items())
        return f'{self.kind}:{args}'

    def to_dict(self) -> dict:
        return {'kind': self.kind, **self.parameters()}

    def __str__(self) -> str:
        return self.label()


def _first(array: np.ndarray, bad: np.ndarray) -> float:
    bad = bad | ~np.isfinite(array)
    return float(array[bad].flat[0])


def _nonnegative(x, name: str = 'x') -> np.ndarray:
    array = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(array) | (array < 0)):
        raise DomainError(f'{name} must be finite and nonnegative', {name: _first(array, array < 0)})
    return array


def _positive(y, name: str = 'y') -> np.ndarray:
    array = np.asarray(y, dtype=float)
    if np.any(~np.isfinite(array) | (array <= 0)):
        raise DomainError(f'{name} must be finite and positive', {name: _first(array, array <= 0)})
    return array


def _scalar_or_array(values: np.ndarray, like):
    return float(values) if np.ndim(like) == 0 else values


@dataclass(frozen=True)
class PowerLaw(IntensityModel):
    """Lambda(x) = scale * x**r."""

    r: float
    scale: float = 1.0

    kind = 'powerlaw'

    def __post_init__(self):
        object.__setattr__(self, 'r', _positive_parameter('r', self.r))
        object.__setattr__(self, 'scale', _positive_parameter('scale', self.scale))

    def cumulative(self, x):
        array = _nonnegative(x)
        return _scalar_or_array(self.scale * array ** self.r, x)

    def derivative(self, x):
        array = _positive(x, 'x')
        return _scalar_or_array(self.r * self.scale * array ** (self.r - 1.0), x)

    def second_derivative(self, x):
        array = _positive(x, 'x')
        return _scalar_or_array(self.r * (self.r - 1.0) * self.scale * array ** (self.r - 2.0), x)

    def invert(self, y):
        array = _positive(y)
        return _scalar_or_array((array / self.scale) ** (1.0 / self.r), y)

    @property
    def c(self) -> float:
        return self.r

    def parameters(self) -> Dict[str, float]:
        return {'r': self.r, 'scale': self.scale}


@dataclass(frozen=True)
class Linear(IntensityModel):
    """Lambda(x) = lam * x, the homogeneous Poisson clock."""

    lam: float = 1.0

    kind = 'linear'

    def __post_init__(self):
        object.__setattr__(self, 'lam', _positive_parameter('lambda', self.lam))

    def cumulative(self, x):
        array = _nonnegative(x)
        return _scalar_or_array(self.lam * array, x)

    def derivative(self, x):
        array = _positive(x, 'x')
        return _scalar_or_array(np.full(array.shape, self.lam), x)

    def second_derivative(self, x):
        array = _positive(x, 'x')
        return _scalar_or_array(np.zeros(array.shape), x)

    def invert(self, y):
        array = _positive(y)
        return _scalar_or_array(array / self.lam, y)

    @property
    def c(self) -> float:
        return 1.0

    def parameters(self) -> Dict[str, float]:
        return {'lambda': self.lam}


_MODEL_ARGS = {
    'powerlaw': (PowerLaw, {'r': 'r', 'scale': 'scale'}, ('r',)),
    'linear': (Linear, {'lambda': 'lam'}, ()),
}


def parse_model(spec: str) -> IntensityModel:
    """Build a model from ``powerlaw:r=<real>,scale=<real>`` or ``linear:lambda=<real>``."""
    kind, _, args = spec.strip().partition(':')
    kind = kind.strip().lower()
    if kind not in _MODEL_ARGS:
        raise DomainError(f'unknown intensity model {kind!r}', {'model': spec})
    cls, names, required = _MODEL_ARGS[kind]

    kwargs = {}
    for item in filter(None, (part.strip() for part in args.split(','))):
        key, sep, raw = item.partition('=')
        key = key.strip().lower()
        if not sep or key not in names:
            raise DomainError(f'unexpected parameter {item!r} for {kind}', {'model': spec})
        try:
            kwargs[names[key]] = float(raw)
        except ValueError as exc:
            raise DomainError(f'parameter {key} must be a number', {'model': spec}) from exc

    missing = [name for name in required if names[name] not in kwargs]
    if missing:
        raise DomainError(f'{kind} requires {", ".join(missing)}', {'model': spec})
    return cls(**kwargs)


def check_condition_ii(model: IntensityModel, x_grid: Sequence[float]) -> List[float]:
    """Residuals x * lambda(x) / Lambda(x) - c on a grid of positive points."""
    x = np.asarray(list(x_grid), dtype=float)
    if x.size == 0:
        raise DomainError('x_grid must not be empty')
    bad = ~np.isfinite(x) | (x <= 0)
    if np.any(bad):
        raise DomainError('x_grid points must be positive', {'x': float(x[bad][0])})
    residual = x * model.derivative(x) / model.cumulative(x) - model.c
    return residual.tolist()

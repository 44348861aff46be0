"""Runtime settings loaded from the environment."""

from dataclasses import dataclass
import math
import os

from dotenv import find_dotenv, load_dotenv

from .errors import ConfigError

DEFAULT_TOL = 1e-8
# Tolerances are accepted in the open interval (MIN_TOL, MAX_TOL).
MIN_TOL = 1e-14
MAX_TOL = 1e-2


@dataclass(frozen=True)
class Settings:
    tol: float = DEFAULT_TOL
    max_evals: int = 200_000
    series_max_terms: int = 600
    series_abs_tol: float = 1e-15
    cancellation_guard: float = 1e8
    log_level: str = 'WARNING'


def _read_float(name: str, default: float) -> float:
    raw = os.environ.get(name)
    if raw is None or not raw.strip():
        return default
    try:
        value = float(raw)
    except ValueError as exc:
        raise ConfigError(f'{name} must be a number', {'value': raw}) from exc
    if not (math.isfinite(value) and value > 0):
        raise ConfigError(f'{name} must be a finite positive number', {'value': raw})
    return value


def _read_tol(name: str, default: float) -> float:
    value = _read_float(name, default)
    if not MIN_TOL < value < MAX_TOL:
        raise ConfigError(f'{name} must lie in ({MIN_TOL:g}, {MAX_TOL:g})', {'value': value})
    return value


def _read_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or not raw.strip():
        return default
    try:
        value = int(raw)
    except ValueError as exc:
        raise ConfigError(f'{name} must be an integer', {'value': raw}) from exc
    if value < 1:
        raise ConfigError(f'{name} must be at least 1', {'value': raw})
    return value


def get_settings() -> Settings:
    """Load settings from the environment (and a .env file, if present)."""
    load_dotenv(find_dotenv(usecwd=True))
    return Settings(
        tol=_read_tol('FRACPOISSON_TOL', DEFAULT_TOL),
        max_evals=_read_int('FRACPOISSON_MAX_EVALS', Settings.max_evals),
        series_max_terms=_read_int('FRACPOISSON_SERIES_MAX_TERMS', Settings.series_max_terms),
        series_abs_tol=_read_float('FRACPOISSON_SERIES_ABS_TOL', Settings.series_abs_tol),
        cancellation_guard=_read_float('FRACPOISSON_CANCELLATION_GUARD', Settings.cancellation_guard),
        log_level=os.environ.get('FRACPOISSON_LOG_LEVEL', Settings.log_level).upper(),
    )

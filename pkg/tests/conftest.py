"""Shared fixtures and independent oracles."""

import math

import numpy as np
import pytest
from click.testing import CliRunner

from fracpoisson.models.special_fn import SeriesEvalConfig

# E_{1/2}(-1) = e * erfc(1)
MITTAG_LEFFLER_HALF_AT_ONE = math.e * math.erfc(1.0)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def mwright_half(z):
    """Closed form M_{1/2}(z) = exp(-z^2 / 4) / sqrt(pi)."""
    return np.exp(-np.asarray(z, dtype=float) ** 2 / 4.0) / math.sqrt(math.pi)


def levy_density(u):
    """One-sided 1/2-stable density (2 sqrt(pi))^-1 u^(-3/2) exp(-1/(4u))."""
    u = np.asarray(u, dtype=float)
    return u ** -1.5 * np.exp(-1.0 / (4.0 * u)) / (2.0 * math.sqrt(math.pi))


def oracle_mp(n, t, beta, terms=400, dps=40):
    """High-precision re-summation of the homogeneous marginal series."""
    mpmath = pytest.importorskip('mpmath')
    with mpmath.workdps(dps):
        x = mpmath.mpf(t) ** mpmath.mpf(beta)
        total = mpmath.mpf(0)
        for k in range(terms):
            total += (mpmath.factorial(n + k) / mpmath.factorial(k) * (-x) ** k
                      / mpmath.gamma(mpmath.mpf(beta) * (k + n) + 1))
        return float(x ** n / mpmath.factorial(n) * total)


@pytest.fixture
def tight_series():
    return SeriesEvalConfig(max_terms=600, abs_tol=1e-12, cancellation_guard=1e8)


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def clean_env(monkeypatch, tmp_path):
    """Environment without FRACPOISSON_* variables and no .env in the cwd."""
    for name in ('FRACPOISSON_TOL', 'FRACPOISSON_MAX_EVALS', 'FRACPOISSON_SERIES_MAX_TERMS',
                 'FRACPOISSON_SERIES_ABS_TOL', 'FRACPOISSON_CANCELLATION_GUARD', 'FRACPOISSON_LOG_LEVEL'):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.chdir(tmp_path)
    return monkeypatch

import math

import numpy as np
import pytest
from scipy.stats import poisson

from fracpoisson.errors import DomainError, PrecisionLoss
from fracpoisson.models.intensity import Linear, PowerLaw
from fracpoisson.models.marginals import (MarginalQuery, distribution, fpp_series_oracle, marginal,
                                          marginal_subordination, marginal_table, poisson_log_pmf,
                                          truncated_distribution)
from fracpoisson.models.special_fn import OrderParam

from conftest import MITTAG_LEFFLER_HALF_AT_ONE, oracle_mp


def query(n, t, beta=0.5, model=None):
    return MarginalQuery(n, t, OrderParam(beta), model or Linear(1.0))


class TestQuery:
    def test_validation(self):
        with pytest.raises(DomainError):
            query(-1, 1.0)
        with pytest.raises(DomainError):
            query(1, -0.5)
        with pytest.raises(DomainError):
            query(1.5, 1.0)

    def test_degenerate_order_rejected(self):
        with pytest.raises(DomainError):
            marginal(query(0, 1.0, beta=1.0))


class TestPoissonFactor:
    def test_matches_scipy(self):
        n = np.arange(51)
        np.testing.assert_allclose(poisson_log_pmf(n, 3.7), poisson.logpmf(n, 3.7), rtol=1e-13)

    def test_zero_rate(self):
        assert poisson_log_pmf(0, 0.0) == 0.0
        assert poisson_log_pmf(3, 0.0) == -np.inf

    def test_large_n_does_not_overflow(self):
        assert np.isfinite(poisson_log_pmf(5000, 5000.0))


class TestMarginal:
    def test_initial_conditions(self):
        assert marginal(query(0, 0.0)).value == 1.0
        report = marginal(query(3, 0.0))
        assert report.value == 0.0
        assert report.n_evals == 0

    def test_mittag_leffler_value(self):
        report = marginal(query(0, 1.0), tol=1e-10)
        assert report.value == pytest.approx(MITTAG_LEFFLER_HALF_AT_ONE, abs=1e-9)
        assert report.total_err_est <= 1e-10
        assert report.z_max > 0

    def test_small_t_tends_to_one(self):
        assert marginal(query(0, 1e-8), tol=1e-10).value == pytest.approx(1.0, abs=1e-3)

    @pytest.mark.parametrize('n', [0, 1, 2, 5])
    @pytest.mark.parametrize('t', [0.5, 2.0])
    def test_against_series_oracle(self, n, t):
        report = marginal(query(n, t), tol=1e-9)
        assert abs(report.value - fpp_series_oracle(n, t, 0.5)) <= 1e-8

    def test_linear_rate_rescales_time(self):
        # Lambda(x) = 4x at t equals Lambda(x) = x at t * 4^(1/beta)
        scaled = marginal(query(2, 1.0, model=Linear(4.0)), tol=1e-10).value
        plain = marginal(query(2, 16.0), tol=1e-10).value
        assert scaled == pytest.approx(plain, abs=1e-9)

    def test_power_law_intensity(self):
        report = marginal(query(3, 1.5, beta=0.7, model=PowerLaw(2.0, 1.0)), tol=1e-9)
        assert 0.0 <= report.value <= 1.0

    def test_strongly_cancelling_case_matches_high_precision(self):
        report = marginal(query(20, 2.0, beta=0.3), tol=1e-11)
        assert report.value == pytest.approx(oracle_mp(20, 2.0, 0.3), abs=2e-9)

    @pytest.mark.parametrize('beta', [0.8, 0.9])
    def test_order_close_to_one(self, beta):
        report = marginal(query(1, 1.0, beta=beta), tol=1e-9)
        assert report.value == pytest.approx(oracle_mp(1, 1.0, beta), abs=1e-8)

    def test_large_n_on_constraint(self):
        # n = 1024 on n = t^beta with beta = 1/2: n P is close to M_{1/2}(1)
        report = marginal(query(1024, 1024.0 ** 2), tol=1e-10)
        assert 1024 * report.value == pytest.approx(0.4393912894, abs=1e-3)


class TestSubordination:
    def test_mittag_leffler_value(self):
        report = marginal_subordination(0, 1.0, 0.5, tol=1e-10)
        assert report.value == pytest.approx(MITTAG_LEFFLER_HALF_AT_ONE, abs=1e-9)

    def test_agrees_with_backbone(self):
        a = marginal_subordination(5, 2.0, 0.3, tol=1e-10)
        b = marginal(query(5, 2.0, beta=0.3), tol=1e-10)
        assert abs(a.value - b.value) <= 1e-9

    def test_against_oracle(self):
        report = marginal_subordination(1, 1.0, 0.5, tol=1e-9)
        assert abs(report.value - fpp_series_oracle(1, 1.0, 0.5)) <= 1e-8


class TestSeriesOracle:
    def test_mittag_leffler_value(self):
        assert fpp_series_oracle(0, 1.0, 0.5) == pytest.approx(MITTAG_LEFFLER_HALF_AT_ONE, abs=1e-13)

    @pytest.mark.parametrize('n, t, beta, tol', [
        (1, 1.0, 0.5, 1e-13),
        (4, 0.5, 0.3, 1e-13),
        (10, 2.0, 0.7, 1e-12),
        # terms peak near 1.6e6 here
        (20, 2.0, 0.3, 5e-9),
    ])
    def test_against_high_precision(self, n, t, beta, tol):
        assert fpp_series_oracle(n, t, beta) == pytest.approx(oracle_mp(n, t, beta), abs=tol)

    def test_error_bound_reported_on_precision_loss(self):
        with pytest.raises(PrecisionLoss) as info:
            fpp_series_oracle(0, 30.0, 0.9)
        assert info.value.context['rounding_bound'] > 0

    def test_n_zero_is_mittag_leffler_series(self):
        x = 0.5 ** 0.7
        expected = sum((-x) ** k / math.gamma(0.7 * k + 1) for k in range(80))
        assert fpp_series_oracle(0, 0.5, 0.7) == pytest.approx(expected, abs=1e-14)

    def test_precision_loss_at_large_t(self):
        with pytest.raises(PrecisionLoss):
            fpp_series_oracle(0, 30.0, 0.9)

    def test_rejects_large_n(self):
        with pytest.raises(DomainError):
            fpp_series_oracle(51, 1.0, 0.5)


class TestDistribution:
    def test_normalization(self):
        reports = distribution(1.0, 0.5, Linear(1.0), n_max=40, tol=1e-9)
        assert len(reports) == 41
        assert sum(r.value for r in reports) == pytest.approx(1.0, abs=1e-6)

    def test_small_time_is_decreasing(self):
        reports = distribution(0.1, 0.5, Linear(1.0), n_max=10, tol=1e-10)
        values = np.array([r.value for r in reports])
        assert values[0] == max(values)
        assert np.all(np.diff(values) < 0)
        for n, value in enumerate(values):
            assert abs(value - fpp_series_oracle(n, 0.1, 0.5)) <= 1e-8

    def test_components_match_single_marginals(self):
        reports = distribution(2.0, 0.3, Linear(1.0), n_max=5, tol=1e-10)
        for n in (0, 3, 5):
            assert reports[n].value == pytest.approx(marginal(query(n, 2.0, beta=0.3), tol=1e-10).value,
                                                     abs=2e-10)
            assert reports[n].meta['query']['n'] == n

    def test_nonnegative(self):
        reports = distribution(5.0, 0.7, PowerLaw(2.0, 1.0), n_max=30, tol=1e-9)
        assert all(r.value >= -1e-9 for r in reports)

    def test_at_time_zero(self):
        values = [r.value for r in distribution(0.0, 0.5, n_max=3)]
        assert values == [1.0, 0.0, 0.0, 0.0]


class TestMarginalTable:
    def test_matches_distribution(self):
        table = marginal_table([0.5, 2.0], 0.3, Linear(1.0), n_values=range(6), tol=1e-10)
        assert table.shape == (2, 6)
        for row, t in zip(table, (0.5, 2.0)):
            expected = [r.value for r in distribution(t, 0.3, Linear(1.0), n_max=5, tol=1e-10)]
            np.testing.assert_allclose(row, expected, rtol=0, atol=2e-10)

    def test_matches_single_marginals(self):
        model = PowerLaw(2.0, 1.0)
        table = marginal_table([0.25, 1.0, 4.0], 0.7, model, n_values=[0, 3], tol=1e-10)
        for i, t in enumerate((0.25, 1.0, 4.0)):
            for j, n in enumerate((0, 3)):
                single = marginal(query(n, t, beta=0.7, model=model), tol=1e-10).value
                assert table[i, j] == pytest.approx(single, abs=2e-10)

    def test_zero_time_rows_hold_initial_values(self):
        table = marginal_table([0.0, 1.0], 0.5, n_values=[0, 1, 2])
        np.testing.assert_array_equal(table[0], [1.0, 0.0, 0.0])
        assert table[1, 0] == pytest.approx(MITTAG_LEFFLER_HALF_AT_ONE, abs=1e-8)

    @pytest.mark.parametrize('times, counts', [([], [0]), ([1.0], []), ([-1.0], [0]),
                                               ([float('nan')], [0]), ([1.0], [1.5]), ([1.0], [-1])])
    def test_validation(self, times, counts):
        with pytest.raises(DomainError):
            marginal_table(times, 0.5, n_values=counts)


def test_truncated_distribution_covers_the_mass():
    result = truncated_distribution(1.0, 0.5, PowerLaw(2.0, 1.0), tol=1e-9, tail_tol=1e-8)
    assert result.tail_bound < 1e-8
    assert result.total == pytest.approx(1.0, abs=1e-6)
    assert result.n_max >= 16

import math

import numpy as np
import pytest
from scipy.special import gamma

from fracpoisson.errors import DomainError
from fracpoisson.models.fractional_ops import (ResidualReport, TimeGrid, caputo_derivative,
                                               convergence_order, fnhpp_residual, kf_residual,
                                               make_grid, singular_exponents, starting_weights,
                                               _rhs_half_line)
from fracpoisson.models.intensity import Linear, PowerLaw
from fracpoisson.models.marginals import fpp_series_oracle
from fracpoisson.models.special_fn import DEFAULT_SERIES


class TestGrid:
    def test_make_grid(self):
        grid = make_grid(2.0, 1 / 64)
        assert grid.size == 128
        assert grid.horizon == pytest.approx(2.0)
        assert grid.nodes[0] == 0.0
        assert grid.points[0] == pytest.approx(1 / 64)

    def test_refined(self):
        fine = make_grid(1.0, 1 / 16).refined()
        assert fine.size == 32
        assert fine.spacing == pytest.approx(1 / 32)

    def test_interior(self):
        grid = make_grid(1.0, 1 / 16)
        assert grid.points[grid.interior()].min() >= 1 / 8

    def test_rejects_bad_grids(self):
        with pytest.raises(DomainError):
            make_grid(1.0, 0.3)
        with pytest.raises(DomainError):
            make_grid(1.0, 0.25)
        with pytest.raises(DomainError):
            make_grid(-1.0, 0.01)
        with pytest.raises(DomainError):
            TimeGrid(0.0, 32)


class TestSingularExponents:
    def test_unit_rate(self):
        assert singular_exponents(0.3) == pytest.approx([0.3, 0.6, 0.9, 1.2, 1.5, 1.8])
        assert singular_exponents(0.5) == pytest.approx([0.5, 1.5])

    def test_power_law(self):
        assert singular_exponents(0.5, PowerLaw(2.0)) == []
        assert singular_exponents(0.3, PowerLaw(2.0)) == pytest.approx([0.6, 1.2, 1.8])


class TestCaputo:
    grid = make_grid(2.0, 1 / 32)

    def test_constant_has_zero_derivative(self):
        values = caputo_derivative(lambda t: np.ones_like(t), 0.5, self.grid)
        np.testing.assert_allclose(values, 0.0, atol=1e-15)

    def test_linear_function_is_exact(self):
        values = caputo_derivative(lambda t: t, 0.5, self.grid)
        expected = self.grid.points ** 0.5 / gamma(1.5)
        np.testing.assert_allclose(values, expected, rtol=1e-12)
        assert values[31] == pytest.approx(1.0 / gamma(1.5), rel=1e-12)

    def test_accepts_sample_arrays_and_scalar_functions(self):
        from_array = caputo_derivative(self.grid.nodes ** 2, 0.3, self.grid)
        from_scalar = caputo_derivative(lambda t: float(t) ** 2, 0.3, self.grid)
        np.testing.assert_allclose(from_array, from_scalar, rtol=1e-14)

    def test_linearity(self):
        f = np.sin(self.grid.nodes)
        g = np.exp(-self.grid.nodes)
        combined = caputo_derivative(2 * f + 3 * g, 0.7, self.grid)
        separate = 2 * caputo_derivative(f, 0.7, self.grid) + 3 * caputo_derivative(g, 0.7, self.grid)
        np.testing.assert_allclose(combined, separate, atol=1e-12)

    def test_starting_weights_make_power_exact(self):
        values = caputo_derivative(lambda t: 1 + 2 * t + 3 * t ** 0.5, 0.5, self.grid, [0.5])
        expected = 2 * self.grid.points ** 0.5 / gamma(1.5) + 3 * gamma(1.5)
        np.testing.assert_allclose(values, expected, rtol=1e-10)

    def test_several_exponents(self):
        exps = [0.3, 0.6, 0.9]
        values = caputo_derivative(lambda t: t ** 0.3 + t ** 0.6 + t ** 0.9, 0.3, self.grid, exps)
        expected = sum(gamma(g + 1) / gamma(g + 0.7) * self.grid.points ** (g - 0.3) for g in exps)
        np.testing.assert_allclose(values, expected, rtol=1e-8)

    def test_starting_weights_shape(self):
        assert starting_weights(0.5, 64, [0.5]).shape == (64, 2)
        assert starting_weights(0.5, 64, [0.5, 1.0]).shape == (64, 2)

    def test_corrected_scheme_stays_exact_on_linear_data(self):
        values = caputo_derivative(lambda t: 3 * t, 0.5, self.grid, [0.5])
        np.testing.assert_allclose(values, 3 * self.grid.points ** 0.5 / gamma(1.5), rtol=1e-12)

    def test_exponents_above_one_are_corrected(self):
        exps = singular_exponents(0.5)
        values = caputo_derivative(lambda t: t ** 0.5 + t ** 1.5, 0.5, self.grid, exps)
        expected = gamma(1.5) + gamma(2.5) / gamma(2.0) * self.grid.points
        np.testing.assert_allclose(values, expected, rtol=1e-8)

    def test_uncorrected_scheme_misses_square_root(self):
        values = caputo_derivative(lambda t: t ** 0.5, 0.5, self.grid)
        assert abs(values[0] - gamma(1.5)) > 1e-3

    def test_rejects_wrong_sample_count(self):
        with pytest.raises(DomainError):
            caputo_derivative(np.ones(10), 0.5, self.grid)

    def test_rejects_degenerate_order(self):
        with pytest.raises(DomainError):
            caputo_derivative(lambda t: t, 1.0, self.grid)


class TestResiduals:
    def test_half_line_rhs_reduces_to_unit_rate_equations(self):
        rhs = _rhs_half_line(1, 0.5, Linear(1.0), 1.0, 1e-10, DEFAULT_SERIES)
        expected = fpp_series_oracle(0, 1.0, 0.5) - fpp_series_oracle(1, 1.0, 0.5)
        assert rhs == pytest.approx(expected, abs=1e-8)

    def test_kf_residual_within_bound(self):
        grid = make_grid(1.0, 1 / 16)
        report = kf_residual(0, 0.5, grid, tol=1e-9)
        assert len(report.lhs) == grid.size
        assert report.within_bound()
        assert report.max_abs_residual < 1e-2

    def test_kf_residual_rejects_negative_n(self):
        with pytest.raises(DomainError):
            kf_residual(-1, 0.5, make_grid(1.0, 1 / 16))

    def test_unknown_support(self):
        with pytest.raises(DomainError):
            fnhpp_residual(1, 0.5, PowerLaw(2.0), make_grid(1.0, 1 / 16), support='strip')

    @pytest.mark.slow
    @pytest.mark.parametrize('support', ['half_line', 'window'])
    def test_fnhpp_residual_report(self, support):
        grid = make_grid(1.0, 1 / 16)
        report = fnhpp_residual(1, 0.5, PowerLaw(2.0), grid, tol=1e-8, support=support)
        assert len(report.rhs) == grid.size
        assert np.all(np.isfinite(report.residuals))
        assert math.isfinite(report.expected_discretization_bound)


def _report(spacing, residual):
    grid = TimeGrid(spacing, 16)
    return ResidualReport(grid=grid, lhs=[0.0] * 16, rhs=[0.0] * 16, max_abs_residual=residual,
                          expected_discretization_bound=1.0)


def test_convergence_order():
    orders = convergence_order([_report(0.1, 4e-3), _report(0.05, 1e-3), _report(0.025, 2.5e-4)])
    assert orders == pytest.approx([2.0, 2.0])


def test_convergence_order_validation():
    with pytest.raises(DomainError):
        convergence_order([_report(0.1, 1e-3)])
    with pytest.raises(DomainError):
        convergence_order([_report(0.05, 1e-3), _report(0.1, 1e-3)])

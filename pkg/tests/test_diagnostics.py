import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from epiforecast import (
    DegenerateInputError,
    ValidationError,
    acf,
    ljung_box,
    normality_test,
    pacf,
    qq_points,
)
from epiforecast.diagnostics import (
    chi_square_sf,
    default_ljung_box_lags,
    normal_quantile,
)

finite_series = arrays(
    np.float64,
    st.integers(20, 60),
    elements=st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False),
).filter(lambda x: np.ptp(x) > 1e-9)


class TestAcf:
    def test_lag_zero_is_one(self):
        rng = np.random.default_rng(0)
        result = acf(rng.normal(size=50), max_lag=10)
        assert result.values[0] == 1.0
        assert list(result.lags) == list(range(11))

    def test_alternating_series_closed_form(self):
        n = 40
        x = np.array([1.0, -1.0] * (n // 2))
        result = acf(x, max_lag=2)
        assert result.values[1] == pytest.approx(-(n - 1) / n, abs=1e-12)
        assert result.values[2] == pytest.approx((n - 2) / n, abs=1e-12)

    def test_confidence_band(self):
        x = np.random.default_rng(1).normal(size=64)
        result = acf(x, max_lag=5)
        assert result.confidence_band == pytest.approx(1.96 / 8.0)

    def test_constant_series_degenerate(self):
        with pytest.raises(DegenerateInputError):
            acf(np.full(30, 2.5), max_lag=5)

    def test_max_lag_bounds(self):
        x = np.arange(10.0)
        with pytest.raises(ValidationError):
            acf(x, max_lag=0)
        with pytest.raises(ValidationError):
            acf(x, max_lag=10)

    @given(finite_series)
    @settings(max_examples=30, deadline=None)
    def test_sign_flip_invariance(self, x):
        left = acf(x, max_lag=5).values
        right = acf(-x, max_lag=5).values
        assert np.allclose(left, right, atol=1e-10)

    @given(finite_series, st.floats(-1e5, 1e5, allow_nan=False))
    @settings(max_examples=30, deadline=None)
    def test_shift_invariance(self, x, c):
        left = acf(x, max_lag=5).values
        right = acf(x + c, max_lag=5).values
        assert np.allclose(left, right, atol=1e-7)

    @given(finite_series)
    @settings(max_examples=30, deadline=None)
    def test_values_bounded_by_one(self, x):
        values = acf(x, max_lag=8).values
        assert np.all(np.abs(values) <= 1.0 + 1e-12)


class TestPacf:
    def test_lag_one_matches_acf(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=80)
        assert pacf(x, max_lag=5).values[1] == pytest.approx(
            acf(x, max_lag=5).values[1], abs=1e-12
        )

    def test_ar1_cuts_off_after_lag_one(self):
        rng = np.random.default_rng(6)
        n = 400
        x = np.zeros(n)
        eps = rng.normal(size=n)
        for t in range(1, n):
            x[t] = 0.7 * x[t - 1] + eps[t]
        result = pacf(x, max_lag=6)
        assert result.values[1] > 0.55
        assert np.all(np.abs(result.values[2:]) < 0.2)

    def test_lag_zero_is_one(self):
        x = np.random.default_rng(7).normal(size=50)
        assert pacf(x, max_lag=4).values[0] == 1.0


class TestLjungBox:
    def test_dof_two_closed_form(self):
        # chi-square survival with dof 2 is exp(-x/2)
        rng = np.random.default_rng(8)
        x = rng.normal(size=60)
        result = ljung_box(x, lags=4, fitted_params=2)
        assert result.dof == 2
        assert result.p_value == pytest.approx(math.exp(-result.statistic / 2), rel=1e-10)

    def test_statistic_formula(self):
        rng = np.random.default_rng(9)
        x = rng.normal(size=50)
        n = 50
        rho = acf(x, max_lag=3).values[1:]
        expected = n * (n + 2) * sum(
            rho[k] ** 2 / (n - (k + 1)) for k in range(3)
        )
        result = ljung_box(x, lags=3)
        assert result.statistic == pytest.approx(expected, rel=1e-12)

    def test_dof_floor_at_one(self):
        x = np.random.default_rng(10).normal(size=50)
        result = ljung_box(x, lags=3, fitted_params=14)
        assert result.dof == 1

    def test_autocorrelated_series_rejects(self):
        rng = np.random.default_rng(11)
        n = 200
        x = np.zeros(n)
        eps = rng.normal(size=n)
        for t in range(1, n):
            x[t] = 0.8 * x[t - 1] + eps[t]
        assert ljung_box(x, lags=10).p_value < 1e-6

    @given(finite_series)
    @settings(max_examples=25, deadline=None)
    def test_statistic_monotone_in_lags(self, x):
        stats = [ljung_box(x, lags=lag).statistic for lag in (1, 3, 5)]
        assert stats[0] <= stats[1] + 1e-12
        assert stats[1] <= stats[2] + 1e-12

    def test_default_lags(self):
        assert default_ljung_box_lags(100) == 10
        assert default_ljung_box_lags(36) == 7
        assert default_ljung_box_lags(8) == 1


class TestNormality:
    def test_method_label(self):
        x = np.random.default_rng(12).normal(size=100)
        assert normality_test(x).method == "jarque-bera"

    def test_gaussian_sample_not_rejected(self):
        x = np.random.default_rng(13).normal(size=500)
        assert normality_test(x).p_value > 0.05

    def test_skewed_sample_rejected(self):
        x = np.random.default_rng(14).exponential(size=500)
        assert normality_test(x).p_value < 1e-6

    def test_needs_eight_points(self):
        with pytest.raises(ValidationError):
            normality_test(np.arange(7.0))


class TestQuantiles:
    def test_normal_quantile_values(self):
        assert normal_quantile(0.975) == pytest.approx(1.959964, abs=1e-6)
        assert normal_quantile(0.5) == 0.0
        assert normal_quantile(0.025) == pytest.approx(-1.959964, abs=1e-6)

    def test_chi_square_sf_known_value(self):
        # dof=1: sf(3.841459) ~ 0.05
        assert chi_square_sf(3.841459, 1) == pytest.approx(0.05, abs=1e-6)


class TestQqPoints:
    def test_points_sorted_and_centered(self):
        rng = np.random.default_rng(15)
        x = rng.normal(size=21)
        points = qq_points(x)
        sample = [p[1] for p in points]
        theoretical = [p[0] for p in points]
        assert sample == sorted(sample)
        assert theoretical == sorted(theoretical)
        # middle order statistic maps to the median of the standard normal
        assert theoretical[10] == pytest.approx(0.0, abs=1e-12)

    def test_symmetric_theoretical_quantiles(self):
        points = qq_points(np.arange(9.0))
        theoretical = np.array([p[0] for p in points])
        assert np.allclose(theoretical, -theoretical[::-1], atol=1e-12)

    def test_needs_three_points(self):
        with pytest.raises(ValidationError):
            qq_points(np.array([1.0, 2.0]))

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from epiforecast import (
    ArCorrected,
    ArModel,
    BaseKind,
    InsufficientDataError,
    MonthDate,
    MonthlySeries,
    NonPositiveValueError,
    SingularDesignError,
    TimeScale,
    ValidationError,
    fit_ar,
    fit_ar_corrected,
    fit_model,
    fit_model1,
    fit_model2,
    fit_model3,
    fit_model4,
    fit_ols,
    forecast,
    lognormal_mean,
    model_label,
    parse_model_name,
)
from epiforecast.series import DesignMatrix

from conftest import SEASONAL, seasonal_series


def month_indices(start: MonthDate, n: int) -> np.ndarray:
    return np.array([start.plus(i).month - 1 for i in range(n)])


def model1_series(n=48, slope=4.0, curvature=0.03, noise=0.0, seed=0,
                  start=MonthDate(2018, 1)) -> MonthlySeries:
    rng = np.random.default_rng(seed)
    t = np.arange(1, n + 1)
    values = SEASONAL[month_indices(start, n)] + slope * t + curvature * t * t
    if noise:
        values = np.maximum(values + rng.normal(0, noise, n), 1.0)
    return MonthlySeries(start, values)


class TestFitOls:
    def test_matches_direct_solve(self):
        rng = np.random.default_rng(3)
        x = np.column_stack([np.ones(20), rng.normal(size=20)])
        beta_true = np.array([2.0, -1.5])
        y = x @ beta_true + rng.normal(0, 0.1, 20)
        fit = fit_ols(DesignMatrix(x, ("c", "x1")), y)
        expected = np.linalg.solve(x.T @ x, x.T @ y)
        assert np.allclose([fit.coefficients["c"], fit.coefficients["x1"]], expected)

    def test_sigma2_is_rss_over_dof(self):
        rng = np.random.default_rng(4)
        x = np.column_stack([np.ones(15), rng.normal(size=15)])
        y = rng.normal(size=15)
        fit = fit_ols(DesignMatrix(x, ("c", "x1")), y)
        rss = float(fit.residuals @ fit.residuals)
        assert fit.sigma2 == pytest.approx(rss / 13)

    def test_rank_deficiency_names_columns(self):
        x = np.column_stack([np.ones(10), np.ones(10), np.arange(10.0)])
        with pytest.raises(SingularDesignError) as err:
            fit_ols(DesignMatrix(x, ("a", "b", "t")), np.arange(10.0))
        message = str(err.value)
        assert "a" in message or "b" in message

    def test_more_params_than_rows(self):
        x = np.ones((3, 4))
        with pytest.raises(InsufficientDataError):
            fit_ols(DesignMatrix(x, ("a", "b", "c", "d")), np.ones(3))

    @given(st.integers(0, 2 ** 32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_residuals_orthogonal_to_design(self, seed):
        rng = np.random.default_rng(seed)
        n, k = 30, 4
        x = np.column_stack([np.ones(n), rng.normal(size=(n, k - 1))])
        y = rng.normal(size=n)
        fit = fit_ols(DesignMatrix(x, tuple(f"c{i}" for i in range(k))), y)
        assert np.all(np.abs(x.T @ fit.residuals) < 1e-6)


class TestModel1:
    def test_exact_recovery(self):
        series = model1_series(noise=0.0)
        fit = fit_model1(series)
        y = series.values
        rss = float(fit.residuals @ fit.residuals)
        assert rss < 1e-16 * float(y @ y)
        # trend coefficients refer to the scaled index, so compare by
        # reconstructing the month-level intercepts at t = 0 (scaled)
        assert fit.n_params == 14
        assert np.allclose(fit.fitted, y)

    def test_effective_sample_is_full_series(self, series48):
        fit = fit_model1(series48)
        assert fit.effective_start == 0
        assert fit.n_effective == 48

    def test_fitted_invariant_to_time_scale(self, series48):
        default = fit_model1(series48)
        identity = fit_model1(series48, time_scale=TimeScale.identity())
        assert np.allclose(default.fitted, identity.fitted, atol=1e-8)

    def test_needs_36_months(self):
        with pytest.raises(InsufficientDataError):
            fit_model1(seasonal_series(30))


class TestModel2:
    def test_residuals_on_log_scale(self, series48):
        fit = fit_model2(series48)
        shifted = series48.values + 1.0
        mu = np.log(shifted) - fit.residuals
        corrected = np.maximum(np.exp(mu + 0.5 * fit.sigma2) - 1.0, 0.0)
        assert np.allclose(fit.fitted, corrected)

    def test_zero_with_default_offset_fits(self):
        values = seasonal_series(48, seed=5).values.copy()
        values[10] = 0.0
        series = MonthlySeries(MonthDate(2018, 1), values)
        fit = fit_model2(series)
        assert np.all(np.isfinite(fit.fitted))

    def test_zero_with_strict_policy_names_month(self):
        values = seasonal_series(48, seed=5).values.copy()
        values[10] = 0.0
        series = MonthlySeries(MonthDate(2018, 1), values)
        with pytest.raises(NonPositiveValueError) as err:
            fit_model2(series, log_offset=0.0)
        assert "2018-11" in str(err.value)

    def test_negative_offset_rejected(self, series48):
        with pytest.raises(ValidationError):
            fit_model2(series48, log_offset=-1.0)

    def test_correction_beats_naive_exp(self):
        # lognormal data: the corrected back-transform should track the
        # conditional mean better than plain exponentiation
        rng = np.random.default_rng(12)
        n = 48
        start = MonthDate(2018, 1)
        t = np.arange(1, n + 1)
        mu = np.log(SEASONAL[month_indices(start, n)]) + 0.004 * t
        corrected_err = []
        naive_err = []
        for _ in range(50):
            y = np.exp(mu + rng.normal(0, 0.4, n))
            series = MonthlySeries(start, y)
            fit = fit_model2(series, log_offset=0.0)
            truth = np.exp(mu + 0.5 * 0.4 ** 2)
            naive = np.exp(np.log(y) - fit.residuals)
            corrected_err.append(np.mean(fit.fitted - truth))
            naive_err.append(np.mean(naive - truth))
        # naive exp is biased low; correction removes most of that
        assert abs(np.mean(corrected_err)) < abs(np.mean(naive_err))


class TestModel3:
    def test_two_step_oracle(self, series48):
        fit = fit_model3(series48)
        y = series48.values
        diffs = y[12:] - y[:-12]
        t = np.arange(13, 49, dtype=float)
        scale = TimeScale.fit(48)
        z = scale.transform(t)
        x = np.column_stack([np.ones(36), z, z * z])
        beta, *_ = np.linalg.lstsq(x, diffs, rcond=None)
        expected_fitted = y[:-12] + x @ beta
        assert np.allclose(fit.fitted, expected_fitted, atol=1e-10)

    def test_exact_recovery_lag_plus_trend(self):
        # y_t = y_{t-12} + 24 + 0.5 t holds exactly for this construction
        n = 48
        t = np.arange(1, n + 1)
        base_year = SEASONAL + 100.0
        values = np.empty(n)
        values[:12] = base_year
        for i in range(12, n):
            values[i] = values[i - 12] + 24 + 0.5 * (i + 1)
        series = MonthlySeries(MonthDate(2018, 1), values)
        fit = fit_model3(series)
        assert float(fit.residuals @ fit.residuals) < 1e-16 * float(values @ values)

    def test_lag_coefficient_is_fixed(self, series48):
        fit = fit_model3(series48)
        assert "lag12" not in fit.coefficients
        assert set(fit.coefficients) == {"intercept", "t", "t2"}
        assert fit.effective_start == 12
        assert fit.n_params == 3


class TestModel4:
    def test_exact_recovery_gamma(self):
        n = 48
        values = np.empty(n)
        values[:12] = SEASONAL + 50.0
        for i in range(12, n):
            values[i] = 0.8 * values[i - 12] + 40.0
        series = MonthlySeries(MonthDate(2018, 1), values)
        fit = fit_model4(series)
        assert fit.coefficients["lag12"] == pytest.approx(0.8, abs=1e-8)
        assert float(fit.residuals @ fit.residuals) < 1e-12

    def test_constant_series_is_singular(self):
        series = MonthlySeries(MonthDate(2018, 1), np.full(48, 7.0))
        with pytest.raises(SingularDesignError):
            fit_model4(series)

    def test_gamma_recovery_with_noise(self):
        errors = []
        for seed in range(200):
            rng = np.random.default_rng(seed)
            n = 48
            values = np.empty(n)
            values[:12] = SEASONAL
            for i in range(12, n):
                values[i] = 0.9 * values[i - 12] + 60.0 + 0.8 * (i + 1)
            values = np.maximum(values + rng.normal(0, 5.0, n), 1.0)
            fit = fit_model4(MonthlySeries(MonthDate(2018, 1), values))
            errors.append(fit.coefficients["lag12"] - 0.9)
        errors = np.array(errors)
        sd = errors.std()
        assert abs(errors.mean()) < 3 * sd / math.sqrt(len(errors)) + 0.02
        assert np.mean(np.abs(errors) <= 3 * sd) > 0.95


class TestFitAr:
    def test_ar1_prediction_closed_form(self):
        model = ArModel(order=1, phi=np.array([0.5]), intercept=0.0,
                        innovation_variance=1.0, aic=0.0)
        history = np.array([1.0, -2.0, 4.0])
        fc = model.forecast(history, 3)
        assert np.allclose(fc, [2.0, 1.0, 0.5])

    def test_predict_in_sample_alignment(self):
        model = ArModel(order=1, phi=np.array([0.5]), intercept=1.0,
                        innovation_variance=1.0, aic=0.0)
        history = np.array([2.0, 4.0, 0.0])
        pred = model.predict_in_sample(history)
        assert np.allclose(pred, [1.0 + 1.0, 1.0 + 2.0])

    def test_zero_residuals(self):
        ar = fit_ar(np.zeros(40), max_order=5)
        assert ar.order == 0
        assert ar.innovation_variance == 0.0

    def test_white_noise_prefers_order_zero(self):
        orders = []
        for seed in range(50):
            rng = np.random.default_rng(seed)
            orders.append(fit_ar(rng.normal(0, 1, 100), max_order=10).order)
        assert np.mean(np.array(orders) == 0) > 0.5

    def test_too_few_residuals(self):
        with pytest.raises(InsufficientDataError):
            fit_ar(np.ones(12), max_order=5)

    def test_negative_order_rejected(self):
        with pytest.raises(ValidationError):
            fit_ar(np.ones(30), max_order=-1)


class TestArCorrected:
    @pytest.mark.parametrize("base", list(BaseKind))
    def test_order_zero_reproduces_base(self, base):
        # the intercept-only AR has a zero estimate because the base OLS
        # residuals sum to zero, so the correction is a no-op
        series = seasonal_series(48, seed=9)
        corrected = fit_ar_corrected(series, base, max_ar_order=0)
        base_fit = fit_model(series, base)
        assert corrected.ar_part.order == 0
        assert np.allclose(corrected.fitted, base_fit.fitted, atol=1e-8)
        fc_corr = forecast(corrected, series, 6)
        fc_base = forecast(base_fit, series, 6)
        assert np.allclose(fc_corr.point, fc_base.point, atol=1e-6)

    def test_metadata(self, series48):
        corrected = fit_ar_corrected(series48, BaseKind.POLY_SEASON)
        assert corrected.kind == ArCorrected(BaseKind.POLY_SEASON)
        assert corrected.base is not None
        assert corrected.effective_start == corrected.ar_part.order
        assert corrected.sigma2 == corrected.ar_part.innovation_variance
        assert corrected.n_params == 14 + corrected.ar_part.order + 1

    def test_correction_helps_on_ar_residuals(self):
        # Model-1 data with strongly autocorrelated errors: the corrected
        # in-sample RMSE should beat the raw base
        rng = np.random.default_rng(77)
        n = 60
        series_mean = model1_series(n, noise=0.0).values
        eps = np.zeros(n)
        innov = rng.normal(0, 20.0, n)
        eps[0] = innov[0]
        for i in range(1, n):
            eps[i] = 0.8 * eps[i - 1] + innov[i]
        series = MonthlySeries(MonthDate(2018, 1), np.maximum(series_mean + eps, 1.0))
        base = fit_model1(series)
        corrected = fit_ar_corrected(series, BaseKind.POLY_SEASON)
        p = corrected.ar_part.order
        assert p >= 1
        base_rss = float(base.residuals[p:] @ base.residuals[p:])
        corr_rss = float(corrected.residuals @ corrected.residuals)
        assert corr_rss < base_rss


class TestForecast:
    def test_months_continue_series(self, series48):
        fit = fit_model1(series48)
        fc = forecast(fit, series48, 3)
        assert [str(m) for m in fc.months] == ["2022-01", "2022-02", "2022-03"]
        assert fc.horizon == 3
        assert len(fc.point) == 3

    def test_horizon_must_be_positive(self, series48):
        fit = fit_model1(series48)
        with pytest.raises(ValidationError):
            forecast(fit, series48, 0)

    def test_poly_season_extends_design(self):
        series = model1_series(noise=0.0)
        fit = fit_model1(series)
        fc = forecast(fit, series, 15)
        t = np.arange(49, 64)
        start = MonthDate(2018, 1)
        months = np.array([start.plus(int(i - 1)).month - 1 for i in t])
        expected = SEASONAL[months] + 4.0 * t + 0.03 * t * t
        assert np.allclose(fc.point, expected, rtol=1e-8)

    def test_lag_recursion_beyond_twelve(self):
        # noiseless lag model: forecasts past h=12 must reuse forecasts as
        # lag inputs, continuing the exact recursion
        n = 48
        values = np.empty(n)
        values[:12] = SEASONAL + 100.0
        for i in range(12, n):
            values[i] = values[i - 12] + 24 + 0.5 * (i + 1)
        series = MonthlySeries(MonthDate(2018, 1), values)
        fit = fit_model3(series)
        fc = forecast(fit, series, 15)
        expected = np.empty(15)
        extended = list(values)
        for step in range(15):
            i = n + step
            expected[step] = extended[i - 12] + 24 + 0.5 * (i + 1)
            extended.append(expected[step])
        assert np.allclose(fc.point, expected, rtol=1e-8)

    def test_ar_corrected_count_base_composes(self, series48):
        corrected = fit_ar_corrected(series48, BaseKind.LAG_POLY_TREND, max_ar_order=2)
        base = corrected.base
        h = 6
        eps_fc = corrected.ar_part.forecast(base.residuals, h)
        fc_base = forecast(base, series48, h)
        fc_corr = forecast(corrected, series48, h)
        # the lag-12 inputs for h <= 12 come from observed data, so the
        # corrected forecast decomposes exactly into base + AR terms
        assert np.allclose(fc_corr.point, fc_base.point + eps_fc, atol=1e-8)


class TestNames:
    def test_labels_round_trip(self):
        for name in ("poly-season", "log", "lag-trend", "lag-poly"):
            kind = parse_model_name(name)
            assert model_label(kind) == name
        kind = parse_model_name("ar-corrected(log)")
        assert kind == ArCorrected(BaseKind.LOG_TRANSFORMED)
        assert model_label(kind) == "ar-corrected(log)"

    def test_bare_ar_corrected_is_deferred(self):
        assert parse_model_name("ar-corrected") is None

    def test_unknown_name_rejected(self):
        with pytest.raises(ValidationError):
            parse_model_name("sarimax")
        with pytest.raises(ValidationError):
            parse_model_name("ar-corrected(sarimax)")


class TestLognormalMean:
    def test_formula(self):
        assert lognormal_mean(1.0, 0.25) == pytest.approx(math.exp(1.125))

    def test_offset_subtracted_and_clamped(self):
        assert lognormal_mean(0.0, 0.0, offset=2.0) == 0.0
        assert lognormal_mean(2.0, 0.5, offset=1.0) == pytest.approx(
            math.exp(2.25) - 1.0
        )


@given(
    center=st.floats(-100, 100),
    scale=st.floats(0.1, 50),
    seed=st.integers(0, 2 ** 16),
)
@settings(max_examples=20, deadline=None)
def test_fitted_values_invariant_to_time_scaling(center, scale, seed):
    series = seasonal_series(48, seed=seed % 100)
    custom = TimeScale(center=center, scale=scale)
    for fitter in (fit_model1, fit_model4):
        default = fitter(series)
        rescaled = fitter(series, time_scale=custom)
        assert np.allclose(default.fitted, rescaled.fitted, atol=1e-8)

"""The five forecasting model families and their estimation machinery.

Model 1 regresses raw counts on twelve month intercepts plus a quadratic
time trend. Model 2 does the same on the log scale and back-transforms
through the lognormal mean exp(mu + sigma^2/2). Model 3 treats the lag-12
value as a fixed offset and fits the remaining trend; Model 4 estimates a
free coefficient on the lag-12 value. The fifth family wraps any of the
four with an autoregressive model of its residuals, order chosen by AIC.

All fits go through one QR-based least-squares routine; fitting is pure
and every result object is immutable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np
import scipy.linalg

from .errors import (
    InsufficientDataError,
    NonPositiveValueError,
    SingularDesignError,
    ValidationError,
)
from .series import (
    DesignMatrix,
    MonthDate,
    MonthlySeries,
    TimeScale,
    build_poly_terms,
    build_seasonal_dummies,
    lag_values,
    poly_columns,
)

MIN_TRAINING_MONTHS = 36
DEFAULT_LOG_OFFSET = 1.0


class BaseKind(Enum):
    """The four regression families, in selection tie-break order."""

    POLY_SEASON = "poly-season"
    LOG_TRANSFORMED = "log"
    LAG_TREND = "lag-trend"
    LAG_POLY_TREND = "lag-poly"

    @property
    def number(self) -> int:
        return list(BaseKind).index(self) + 1


@dataclass(frozen=True)
class ArCorrected:
    """A base model plus an AR model of its residuals."""

    base: BaseKind

    def __post_init__(self):
        if not isinstance(self.base, BaseKind):
            raise ValidationError("ar-corrected base must be one of the four regression families")


ModelKind = Union[BaseKind, ArCorrected]

BASE_KINDS = tuple(BaseKind)


def model_label(kind: ModelKind) -> str:
    if isinstance(kind, ArCorrected):
        return f"ar-corrected({kind.base.value})"
    return kind.value


def parse_model_name(name: str) -> ModelKind | None:
    """Parse a CLI/service model name.

    Returns None for the bare name "ar-corrected", whose base model must be
    chosen by rolling selection; "ar-corrected(<base>)" pins the base.
    """
    name = name.strip().lower()
    for kind in BaseKind:
        if name == kind.value:
            return kind
    if name == "ar-corrected":
        return None
    if name.startswith("ar-corrected(") and name.endswith(")"):
        inner = name[len("ar-corrected(") : -1]
        for kind in BaseKind:
            if inner == kind.value:
                return ArCorrected(kind)
    raise ValidationError(
        f"unknown model {name!r}; expected one of "
        + ", ".join([k.value for k in BaseKind] + ["ar-corrected", "ar-corrected(<base>)"])
    )


@dataclass(frozen=True)
class OlsFit:
    coefficients: dict[str, float]
    residuals: np.ndarray
    fitted: np.ndarray
    sigma2: float


def fit_ols(design: DesignMatrix, response: np.ndarray) -> OlsFit:
    """Least squares via pivoted QR; never forms the normal matrix.

    sigma2 is RSS / (n - k). Rank deficiency raises SingularDesignError
    naming the columns the pivoting pushed past the numerical rank.
    """
    y = np.asarray(response, dtype=float)
    X = design.matrix
    n, k = X.shape
    if y.shape != (n,):
        raise ValidationError("response length must match design rows")
    if n < k:
        raise InsufficientDataError(
            f"need at least as many rows ({n}) as columns ({k})"
        )
    q, r, pivot = scipy.linalg.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    tol = max(n, k) * np.finfo(float).eps * (diag.max() if diag.size else 0.0)
    rank = int(np.sum(diag > tol))
    if rank < k:
        raise SingularDesignError([design.names[j] for j in pivot[rank:]])
    beta_pivoted = scipy.linalg.solve_triangular(r, q.T @ y)
    beta = np.empty(k)
    beta[pivot] = beta_pivoted
    fitted = X @ beta
    residuals = y - fitted
    dof = n - k
    rss = float(residuals @ residuals)
    sigma2 = rss / dof if dof > 0 else 0.0
    coefficients = {name: float(b) for name, b in zip(design.names, beta)}
    return OlsFit(coefficients, residuals, fitted, sigma2)


@dataclass(frozen=True)
class ArModel:
    """AR(p) with intercept, estimated by conditional least squares."""

    order: int
    phi: np.ndarray
    intercept: float
    innovation_variance: float
    aic: float

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float)
        if phi.shape != (self.order,):
            raise ValidationError("phi length must equal the AR order")
        if self.innovation_variance < 0:
            raise ValidationError("innovation variance must be >= 0")
        phi = phi.copy()
        phi.flags.writeable = False
        object.__setattr__(self, "phi", phi)

    def predict_in_sample(self, residuals: np.ndarray) -> np.ndarray:
        """One-step-ahead predictions for residuals[p:], given the past."""
        eps = np.asarray(residuals, dtype=float)
        p = self.order
        pred = np.full(eps.size - p, self.intercept)
        for i in range(1, p + 1):
            pred += self.phi[i - 1] * eps[p - i : eps.size - i]
        return pred

    def forecast(self, residuals: np.ndarray, horizon: int) -> np.ndarray:
        """Iterate the AR recursion with future innovations set to zero."""
        history = list(np.asarray(residuals, dtype=float)[-self.order :] if self.order else [])
        out = np.empty(horizon)
        for h in range(horizon):
            value = self.intercept
            for i in range(1, self.order + 1):
                value += self.phi[i - 1] * history[-i]
            out[h] = value
            history.append(value)
        return out


@dataclass(frozen=True, eq=False)
class FittedModel:
    """A fitted model: coefficients, residuals, and count-scale fitted values.

    residuals live on the model's working scale (log scale for the
    log-transformed family); fitted is always on the count scale.
    effective_start is the 0-based index of the first training row the
    model could use (12 for the lag-12 families).
    """

    kind: ModelKind
    coefficients: dict[str, float]
    sigma2: float
    residuals: np.ndarray
    fitted: np.ndarray
    effective_start: int
    time_scale: TimeScale
    log_offset: float = 0.0
    ar_part: ArModel | None = None
    base: "FittedModel | None" = None

    def __post_init__(self):
        if len(self.residuals) != len(self.fitted):
            raise ValidationError("residuals and fitted must be equally long")
        if self.sigma2 < 0:
            raise ValidationError("sigma2 must be >= 0")

    @property
    def n_effective(self) -> int:
        return len(self.residuals)

    @property
    def effective_end(self) -> int:
        return self.effective_start + self.n_effective - 1

    @property
    def n_params(self) -> int:
        n = len(self.coefficients)
        if self.ar_part is not None:
            n += self.ar_part.order + 1
        return n


@dataclass(frozen=True)
class ForecastResult:
    horizon: int
    months: tuple[MonthDate, ...]
    point: np.ndarray
    model: ModelKind


def _require_length(series: MonthlySeries, minimum: int = MIN_TRAINING_MONTHS) -> None:
    if len(series) < minimum:
        raise InsufficientDataError(
            f"series has {len(series)} months; at least {minimum} are required"
        )


def fit_model1(series: MonthlySeries, time_scale: TimeScale | None = None) -> FittedModel:
    """Raw counts on 12 month intercepts + quadratic trend."""
    _require_length(series)
    scale = time_scale or TimeScale.fit(len(series))
    design = build_seasonal_dummies(series).hstack(build_poly_terms(series, 2, scale))
    fit = fit_ols(design, series.values)
    return FittedModel(
        kind=BaseKind.POLY_SEASON,
        coefficients=fit.coefficients,
        sigma2=fit.sigma2,
        residuals=fit.residuals,
        fitted=fit.fitted,
        effective_start=0,
        time_scale=scale,
    )


def lognormal_mean(mu: np.ndarray, sigma2: float, offset: float = 0.0) -> np.ndarray:
    """Count-scale mean of exp(mu + eps) - offset when eps ~ N(0, sigma2).

    The naive back-transform exp(mu) underestimates the mean; adding
    sigma2/2 in the exponent removes that bias. Clamped at zero because the
    offset subtraction can dip below it.
    """
    return np.maximum(np.exp(np.asarray(mu) + 0.5 * sigma2) - offset, 0.0)


def fit_model2(
    series: MonthlySeries,
    time_scale: TimeScale | None = None,
    log_offset: float = DEFAULT_LOG_OFFSET,
) -> FittedModel:
    """Log counts on the Model-1 design; lognormal-corrected back-transform.

    log_offset=0 is the strict policy: any zero count is a domain error
    naming the offending month.
    """
    _require_length(series)
    if log_offset < 0:
        raise ValidationError("log offset must be >= 0")
    shifted = series.values + log_offset
    if np.any(shifted <= 0):
        bad = int(np.argmax(shifted <= 0))
        raise NonPositiveValueError(series.month_at(bad), float(series.values[bad]))
    scale = time_scale or TimeScale.fit(len(series))
    design = build_seasonal_dummies(series).hstack(build_poly_terms(series, 2, scale))
    fit = fit_ols(design, np.log(shifted))
    return FittedModel(
        kind=BaseKind.LOG_TRANSFORMED,
        coefficients=fit.coefficients,
        sigma2=fit.sigma2,
        residuals=fit.residuals,
        fitted=lognormal_mean(fit.fitted, fit.sigma2, log_offset),
        effective_start=0,
        time_scale=scale,
        log_offset=log_offset,
    )


def _lagged_design(
    series: MonthlySeries, scale: TimeScale, with_lag_column: bool
) -> tuple[DesignMatrix, np.ndarray, np.ndarray]:
    """Intercept + trend design restricted to rows where lag-12 is defined."""
    lagged = lag_values(series, 12)
    start = lagged.first_defined
    poly = build_poly_terms(series, 2, scale).take_rows(start)
    ones = DesignMatrix(np.ones((poly.n_rows, 1)), ("intercept",))
    design = ones.hstack(poly)
    lag_vals = lagged.values[start:]
    if with_lag_column:
        design = DesignMatrix(
            np.hstack([np.ones((poly.n_rows, 1)), lag_vals[:, None], poly.matrix]),
            ("intercept", "lag12") + poly.names,
        )
    return design, lag_vals, series.values[start:]


def fit_model3(series: MonthlySeries, time_scale: TimeScale | None = None) -> FittedModel:
    """Lag-12 offset model: regress y_t - y_{t-12} on intercept + trend."""
    _require_length(series)
    scale = time_scale or TimeScale.fit(len(series))
    design, lag_vals, response = _lagged_design(series, scale, with_lag_column=False)
    fit = fit_ols(design, response - lag_vals)
    fitted = lag_vals + fit.fitted
    return FittedModel(
        kind=BaseKind.LAG_TREND,
        coefficients=fit.coefficients,
        sigma2=fit.sigma2,
        residuals=fit.residuals,
        fitted=fitted,
        effective_start=12,
        time_scale=scale,
    )


def fit_model4(series: MonthlySeries, time_scale: TimeScale | None = None) -> FittedModel:
    """Free lag-12 coefficient plus intercept and quadratic trend."""
    _require_length(series)
    scale = time_scale or TimeScale.fit(len(series))
    design, _, response = _lagged_design(series, scale, with_lag_column=True)
    fit = fit_ols(design, response)
    return FittedModel(
        kind=BaseKind.LAG_POLY_TREND,
        coefficients=fit.coefficients,
        sigma2=fit.sigma2,
        residuals=fit.residuals,
        fitted=fit.fitted,
        effective_start=12,
        time_scale=scale,
    )


def default_max_ar_order(n_residuals: int) -> int:
    return max(0, min(10, n_residuals // 5))


def _ar_design(eps: np.ndarray, order: int, first_row: int) -> DesignMatrix:
    """Intercept plus lag columns for rows first_row..n-1 of the residuals."""
    n = eps.size
    n_rows = n - first_row
    columns = [np.ones(n_rows)]
    names = ["ar_intercept"]
    for i in range(1, order + 1):
        columns.append(eps[first_row - i : n - i])
        names.append(f"phi{i}")
    return DesignMatrix(np.column_stack(columns), tuple(names))


def fit_ar(residuals: np.ndarray, max_order: int) -> ArModel:
    """Conditional least squares AR(p) for p = 0..max_order, lowest AIC wins.

    All candidate orders are scored on the common conditioning sample that
    starts at row max_order, so AIC = n_eff * ln(RSS / n_eff) + 2 (p + 1)
    compares like with like (n_eff = n - max_order throughout). Ties keep
    the smaller order; orders with a singular lag design are skipped. The
    winning order is then refit on its own maximal sample (rows p..n-1)
    for the reported coefficients and innovation variance.
    """
    eps = np.asarray(residuals, dtype=float)
    n = eps.size
    if max_order < 0:
        raise ValidationError("max AR order must be >= 0")
    if n < max_order + 10:
        raise InsufficientDataError(
            f"need at least max_order + 10 = {max_order + 10} residuals, got {n}"
        )
    n_eff = n - max_order
    best_order: int | None = None
    best_aic = math.inf
    for p in range(max_order + 1):
        design = _ar_design(eps, p, max_order)
        try:
            fit = fit_ols(design, eps[max_order:])
        except (SingularDesignError, InsufficientDataError):
            continue
        rss = float(fit.residuals @ fit.residuals)
        mean_square = rss / n_eff
        aic = (n_eff * math.log(mean_square) if mean_square > 0 else -math.inf) + 2 * (p + 1)
        if aic < best_aic:
            best_aic = aic
            best_order = p
    assert best_order is not None  # p = 0 never raises on n_eff >= 10 rows
    p = best_order
    final = fit_ols(_ar_design(eps, p, p), eps[p:])
    rss = float(final.residuals @ final.residuals)
    dof = (n - p) - (p + 1)
    return ArModel(
        order=p,
        phi=np.array([final.coefficients[f"phi{i}"] for i in range(1, p + 1)]),
        intercept=final.coefficients["ar_intercept"],
        innovation_variance=rss / dof if dof > 0 else 0.0,
        aic=best_aic,
    )


def fit_ar_on_residuals(base: FittedModel, max_order: int | None = None) -> ArModel:
    if max_order is None:
        max_order = default_max_ar_order(base.n_effective)
    return fit_ar(base.residuals, max_order)


def fit_ar_corrected(
    series: MonthlySeries,
    base_kind: BaseKind,
    max_ar_order: int | None = None,
    log_offset: float = DEFAULT_LOG_OFFSET,
    time_scale: TimeScale | None = None,
) -> FittedModel:
    """Fit a base model, then an AR model of its residuals.

    In-sample fitted values add the one-step AR residual prediction to the
    base mean, on the base model's working scale; the first p rows of the
    base's effective sample are consumed as AR startup values.
    """
    base = fit_base_model(series, base_kind, log_offset=log_offset, time_scale=time_scale)
    ar = fit_ar_on_residuals(base, max_ar_order)
    p = ar.order
    eps_pred = ar.predict_in_sample(base.residuals)
    if base_kind is BaseKind.LOG_TRANSFORMED:
        shifted = series.values[base.effective_start + p :] + base.log_offset
        mu = np.log(shifted) - base.residuals[p:]
        fitted = lognormal_mean(mu + eps_pred, base.sigma2, base.log_offset)
    else:
        fitted = base.fitted[p:] + eps_pred
    residuals = base.residuals[p:] - eps_pred
    return FittedModel(
        kind=ArCorrected(base_kind),
        coefficients=dict(base.coefficients),
        sigma2=ar.innovation_variance,
        residuals=residuals,
        fitted=fitted,
        effective_start=base.effective_start + p,
        time_scale=base.time_scale,
        log_offset=base.log_offset,
        ar_part=ar,
        base=base,
    )


_BASE_FITTERS = {
    BaseKind.POLY_SEASON: fit_model1,
    BaseKind.LOG_TRANSFORMED: fit_model2,
    BaseKind.LAG_TREND: fit_model3,
    BaseKind.LAG_POLY_TREND: fit_model4,
}


def fit_base_model(
    series: MonthlySeries,
    kind: BaseKind,
    log_offset: float = DEFAULT_LOG_OFFSET,
    time_scale: TimeScale | None = None,
) -> FittedModel:
    if kind is BaseKind.LOG_TRANSFORMED:
        return fit_model2(series, time_scale, log_offset)
    return _BASE_FITTERS[kind](series, time_scale)


def fit_model(
    series: MonthlySeries,
    kind: ModelKind,
    log_offset: float = DEFAULT_LOG_OFFSET,
    max_ar_order: int | None = None,
    time_scale: TimeScale | None = None,
) -> FittedModel:
    """Fit any of the five model kinds."""
    if isinstance(kind, ArCorrected):
        return fit_ar_corrected(
            series, kind.base, max_ar_order=max_ar_order,
            log_offset=log_offset, time_scale=time_scale,
        )
    return fit_base_model(series, kind, log_offset=log_offset, time_scale=time_scale)


def _trend_at(model: FittedModel, raw_positions: np.ndarray) -> np.ndarray:
    poly = poly_columns(raw_positions, 2, model.time_scale)
    coef = model.coefficients
    return coef["t"] * poly.column("t") + coef["t2"] * poly.column("t2")


def forecast(model: FittedModel, series: MonthlySeries, horizon: int) -> ForecastResult:
    """Point forecasts for the ``horizon`` months after the training series.

    Lag-12 models read observed values while t - 12 lands inside the
    training window and feed their own forecasts back in beyond that. The
    AR-corrected family adds the iterated AR residual forecast on the base
    model's working scale.
    """
    if horizon < 1:
        raise ValidationError(f"horizon must be >= 1, got {horizon}")
    n = len(series)
    base = model.base if isinstance(model.kind, ArCorrected) else model
    base_kind = base.kind
    coef = base.coefficients

    eps_forecast = np.zeros(horizon)
    if model.ar_part is not None:
        eps_forecast = model.ar_part.forecast(base.residuals, horizon)

    months = tuple(series.end.plus(h) for h in range(1, horizon + 1))
    raw = np.arange(n + 1, n + horizon + 1, dtype=float)
    trend = _trend_at(base, raw)

    extended = list(series.values)
    point = np.empty(horizon)
    for h in range(horizon):
        if base_kind in (BaseKind.POLY_SEASON, BaseKind.LOG_TRANSFORMED):
            mu = coef[months[h].name] + trend[h]
            if base_kind is BaseKind.LOG_TRANSFORMED:
                value = float(
                    lognormal_mean(mu + eps_forecast[h], base.sigma2, base.log_offset)
                )
            else:
                value = mu + eps_forecast[h]
        else:
            lag_input = extended[n + h - 12]
            if base_kind is BaseKind.LAG_TREND:
                mean = lag_input + coef["intercept"] + trend[h]
            else:
                mean = coef["lag12"] * lag_input + coef["intercept"] + trend[h]
            value = mean + eps_forecast[h]
        point[h] = value
        extended.append(value)
    return ForecastResult(horizon=horizon, months=months, point=point, model=model.kind)

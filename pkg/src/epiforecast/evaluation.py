"""Accuracy metrics, expanding-window rolling forecasts, model selection.

The selection procedure runs rolling out-of-sample forecasts for the four
regression families, picks the one with the lowest average MAPE (ties go
to the lower model number), wraps it with AR error correction, and keeps
whichever of the two scores better. Every window refits all parameters on
the growing training prefix; nothing is cached across windows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AllWindowsFailedError,
    EpiForecastError,
    InsufficientDataError,
    UndefinedMetricError,
    ValidationError,
)
from .models import (
    BASE_KINDS,
    ArCorrected,
    BaseKind,
    DEFAULT_LOG_OFFSET,
    FittedModel,
    MIN_TRAINING_MONTHS,
    ModelKind,
    fit_model,
    forecast,
    model_label,
    parse_model_name,
)
from .series import MonthlySeries


def rmse(actual, predicted) -> float:
    a, p = _paired(actual, predicted)
    return math.sqrt(float(np.mean((a - p) ** 2)))


def mse(actual, predicted) -> float:
    a, p = _paired(actual, predicted)
    return float(np.mean((a - p) ** 2))


def mape(actual, predicted) -> tuple[float, int, int]:
    """Mean |relative error| as a fraction, over points with actual > 0.

    Returns (value, n_used, n_skipped); zero actuals are skipped, and a
    fully-zero actual vector has no defined MAPE.
    """
    a, p = _paired(actual, predicted)
    usable = a > 0
    n_used = int(usable.sum())
    n_skipped = a.size - n_used
    if n_used == 0:
        raise UndefinedMetricError("MAPE is undefined when all actual values are zero")
    value = float(np.mean(np.abs((a[usable] - p[usable]) / a[usable])))
    return value, n_used, n_skipped


def rse(residuals, n_params: int) -> float:
    """Residual standard error: sqrt(RSS / (n - n_params))."""
    r = np.asarray(residuals, dtype=float)
    if r.size <= n_params:
        raise ValidationError(
            f"need more residuals ({r.size}) than parameters ({n_params})"
        )
    return math.sqrt(float(r @ r) / (r.size - n_params))


def _paired(actual, predicted) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(actual, dtype=float)
    p = np.asarray(predicted, dtype=float)
    if a.shape != p.shape or a.ndim != 1 or a.size == 0:
        raise ValidationError("actual and predicted must be equal-length nonempty vectors")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(p))):
        raise ValidationError("actual and predicted must be finite")
    return a, p


@dataclass(frozen=True)
class MetricSet:
    rmse: float
    mape: float
    mse: float
    rse: float
    n_used: int
    n_skipped_zero: int


def in_sample_metrics(fit: FittedModel, series: MonthlySeries) -> MetricSet:
    """Count-scale accuracy of the fitted values over the effective sample."""
    actual = series.values[fit.effective_start : fit.effective_end + 1]
    predicted = fit.fitted
    mape_value, n_used, n_skipped = mape(actual, predicted)
    return MetricSet(
        rmse=rmse(actual, predicted),
        mape=mape_value,
        mse=mse(actual, predicted),
        rse=rse(actual - predicted, fit.n_params),
        n_used=n_used,
        n_skipped_zero=n_skipped,
    )


ROLLING_MODES = ("fixed", "to-end")


@dataclass(frozen=True)
class RollingWindow:
    train_size: int
    horizon: int
    mape: float | None
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass(frozen=True)
class RollingResult:
    model: ModelKind
    windows: tuple[RollingWindow, ...]
    average_mape: float

    @property
    def n_failed(self) -> int:
        return sum(1 for w in self.windows if w.failed)


def rolling_forecast(
    series: MonthlySeries,
    kind: ModelKind,
    min_train: int = MIN_TRAINING_MONTHS,
    horizon: int = 3,
    mode: str = "fixed",
    log_offset: float = DEFAULT_LOG_OFFSET,
    max_ar_order: int | None = None,
) -> RollingResult:
    """Expanding-window out-of-sample MAPE for one model kind.

    Training prefixes grow one month at a time from ``min_train`` to
    n - 1. In "fixed" mode each window forecasts min(horizon, remaining)
    steps; in "to-end" mode it forecasts every remaining month, which for a
    44-month series yields test sizes 8, 7, ..., 1. Windows whose fit fails
    are flagged and excluded from the average.
    """
    if mode not in ROLLING_MODES:
        raise ValidationError(f"mode must be one of {ROLLING_MODES}, got {mode!r}")
    if horizon < 1:
        raise ValidationError(f"horizon must be >= 1, got {horizon}")
    if min_train < 1:
        raise ValidationError(f"min_train must be >= 1, got {min_train}")
    n = len(series)
    if n < min_train + 1:
        raise InsufficientDataError(
            f"rolling evaluation needs at least min_train + 1 = {min_train + 1} "
            f"months, got {n}"
        )
    windows: list[RollingWindow] = []
    for train_size in range(min_train, n):
        remaining = n - train_size
        steps = remaining if mode == "to-end" else min(horizon, remaining)
        try:
            fit = fit_model(
                series.prefix(train_size), kind,
                log_offset=log_offset, max_ar_order=max_ar_order,
            )
            predicted = forecast(fit, series.prefix(train_size), steps).point
            actual = series.values[train_size : train_size + steps]
            value, _, _ = mape(actual, predicted)
            windows.append(RollingWindow(train_size, steps, value))
        except EpiForecastError as exc:
            windows.append(RollingWindow(train_size, steps, None, error=str(exc)))
    scores = [w.mape for w in windows if not w.failed]
    if not scores:
        raise AllWindowsFailedError(
            f"all {len(windows)} rolling windows failed for model "
            f"{model_label(kind)}; last error: {windows[-1].error}"
        )
    return RollingResult(
        model=kind, windows=tuple(windows), average_mape=float(np.mean(scores))
    )


@dataclass(frozen=True)
class SelectionConfig:
    min_train: int = MIN_TRAINING_MONTHS
    horizon: int = 3
    mode: str = "fixed"
    log_offset: float = DEFAULT_LOG_OFFSET
    max_ar_order: int | None = None


def _tie_tolerance(best_mape: float) -> float:
    return 1e-12 + 1e-9 * best_mape


def pick_best_base(results: dict[BaseKind, RollingResult]) -> BaseKind:
    """Lowest average MAPE wins; scores within floating-point noise of the
    best count as ties and go to the lowest model number."""
    best_mape = min(r.average_mape for r in results.values())
    tol = _tie_tolerance(best_mape)
    tied = [k for k in results if results[k].average_mape <= best_mape + tol]
    return min(tied, key=lambda kind: kind.number)


def resolve_model_kind(
    name: str, series: MonthlySeries, config: SelectionConfig
) -> ModelKind:
    """Parse a model name; a bare "ar-corrected" picks its base by the
    rolling MAPE comparison over the four regression families."""
    kind = parse_model_name(name)
    if kind is not None:
        return kind
    results: dict[BaseKind, RollingResult] = {}
    for base in BASE_KINDS:
        try:
            results[base] = rolling_forecast(
                series, base,
                min_train=config.min_train, horizon=config.horizon,
                mode=config.mode, log_offset=config.log_offset,
            )
        except EpiForecastError:
            continue
    if not results:
        raise AllWindowsFailedError(
            "cannot choose an AR base: no candidate model produced rolling forecasts"
        )
    return ArCorrected(pick_best_base(results))


@dataclass(frozen=True)
class SelectionReport:
    """Outcome of the rolling model-selection procedure for one series."""

    candidate_results: dict[BaseKind, RollingResult]
    base_choice: BaseKind
    corrected_result: RollingResult | None
    final_choice: ModelKind
    in_sample: dict[ModelKind, MetricSet] = field(default_factory=dict)
    fits: dict[ModelKind, FittedModel] = field(default_factory=dict)
    candidate_errors: dict[BaseKind, str] = field(default_factory=dict)

    @property
    def final_average_mape(self) -> float:
        if isinstance(self.final_choice, ArCorrected):
            assert self.corrected_result is not None
            return self.corrected_result.average_mape
        return self.candidate_results[self.final_choice].average_mape


def select_model(series: MonthlySeries, config: SelectionConfig = SelectionConfig()) -> SelectionReport:
    """Pick the best model by average rolling MAPE, then try AR correction.

    The base choice minimizes average MAPE over the four regression
    families (ties break toward the lower model number); the AR-corrected
    variant replaces it only when strictly better. In-sample metrics are
    reported for all five candidates on the full series but do not affect
    the choice.
    """
    required = config.min_train + (config.horizon if config.mode == "fixed" else 1)
    if len(series) < required:
        raise InsufficientDataError(
            f"selection needs at least {required} months "
            f"(min_train {config.min_train} + horizon), got {len(series)}"
        )

    candidate_results: dict[BaseKind, RollingResult] = {}
    candidate_errors: dict[BaseKind, str] = {}
    for kind in BASE_KINDS:
        try:
            candidate_results[kind] = rolling_forecast(
                series, kind,
                min_train=config.min_train, horizon=config.horizon,
                mode=config.mode, log_offset=config.log_offset,
            )
        except EpiForecastError as exc:
            candidate_errors[kind] = str(exc)
    if not candidate_results:
        raise AllWindowsFailedError(
            "no candidate model produced a usable rolling forecast; errors: "
            + "; ".join(f"{model_label(k)}: {e}" for k, e in candidate_errors.items())
        )

    base_choice = pick_best_base(candidate_results)

    corrected_kind = ArCorrected(base_choice)
    try:
        corrected_result = rolling_forecast(
            series, corrected_kind,
            min_train=config.min_train, horizon=config.horizon,
            mode=config.mode, log_offset=config.log_offset,
            max_ar_order=config.max_ar_order,
        )
    except EpiForecastError:
        corrected_result = None

    base_mape = candidate_results[base_choice].average_mape
    final_choice: ModelKind = base_choice
    if (
        corrected_result is not None
        and corrected_result.average_mape < base_mape - _tie_tolerance(base_mape)
    ):
        final_choice = corrected_kind

    in_sample: dict[ModelKind, MetricSet] = {}
    fits: dict[ModelKind, FittedModel] = {}
    for kind in (*BASE_KINDS, corrected_kind):
        try:
            fit = fit_model(
                series, kind,
                log_offset=config.log_offset, max_ar_order=config.max_ar_order,
            )
            fits[kind] = fit
            in_sample[kind] = in_sample_metrics(fit, series)
        except EpiForecastError:
            continue

    return SelectionReport(
        candidate_results=candidate_results,
        base_choice=base_choice,
        corrected_result=corrected_result,
        final_choice=final_choice,
        in_sample=in_sample,
        fits=fits,
        candidate_errors=candidate_errors,
    )

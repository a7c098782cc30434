"""Monthly count forecasting with seasonal regression and AR correction."""

from .errors import (
    AllWindowsFailedError,
    DataFormatError,
    DegenerateInputError,
    EpiForecastError,
    InsufficientDataError,
    NonPositiveValueError,
    RegionNotFoundError,
    SingularDesignError,
    UndefinedMetricError,
    ValidationError,
)
from .series import (
    DesignMatrix,
    MonthDate,
    MonthlySeries,
    TimeIndex,
    TimeScale,
    build_poly_terms,
    build_seasonal_dummies,
    lag_values,
    month_at,
)
from .models import (
    ArCorrected,
    ArModel,
    BASE_KINDS,
    BaseKind,
    DEFAULT_LOG_OFFSET,
    FittedModel,
    ForecastResult,
    MIN_TRAINING_MONTHS,
    ModelKind,
    OlsFit,
    fit_ar,
    fit_ar_corrected,
    fit_ar_on_residuals,
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
from .diagnostics import (
    AcfResult,
    LjungBoxResult,
    NormalityResult,
    acf,
    ljung_box,
    normality_test,
    pacf,
    qq_points,
)
from .evaluation import (
    MetricSet,
    RollingResult,
    RollingWindow,
    SelectionConfig,
    SelectionReport,
    in_sample_metrics,
    mape,
    mse,
    rmse,
    rolling_forecast,
    rse,
    select_model,
)
from .ingest import Dataset, aggregate_to_monthly, parse_csv, write_csv

__version__ = "0.1.0"

__all__ = [
    "AcfResult",
    "AllWindowsFailedError",
    "ArCorrected",
    "ArModel",
    "BASE_KINDS",
    "BaseKind",
    "DEFAULT_LOG_OFFSET",
    "DataFormatError",
    "Dataset",
    "DegenerateInputError",
    "DesignMatrix",
    "EpiForecastError",
    "FittedModel",
    "ForecastResult",
    "InsufficientDataError",
    "LjungBoxResult",
    "MIN_TRAINING_MONTHS",
    "MetricSet",
    "ModelKind",
    "MonthDate",
    "MonthlySeries",
    "NonPositiveValueError",
    "NormalityResult",
    "OlsFit",
    "RegionNotFoundError",
    "RollingResult",
    "RollingWindow",
    "SelectionConfig",
    "SelectionReport",
    "SingularDesignError",
    "TimeIndex",
    "TimeScale",
    "UndefinedMetricError",
    "ValidationError",
    "acf",
    "aggregate_to_monthly",
    "build_poly_terms",
    "build_seasonal_dummies",
    "fit_ar",
    "fit_ar_corrected",
    "fit_ar_on_residuals",
    "fit_model",
    "fit_model1",
    "fit_model2",
    "fit_model3",
    "fit_model4",
    "fit_ols",
    "forecast",
    "in_sample_metrics",
    "lag_values",
    "ljung_box",
    "lognormal_mean",
    "mape",
    "model_label",
    "month_at",
    "mse",
    "normality_test",
    "pacf",
    "parse_csv",
    "parse_model_name",
    "qq_points",
    "rmse",
    "rolling_forecast",
    "rse",
    "select_model",
    "write_csv",
]

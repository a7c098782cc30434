"""Exception hierarchy shared by the library, CLI, and HTTP service.

Every error carries a short machine-readable ``code`` so the CLI can map it
to a stable exit status and the service to an HTTP response.
"""

from __future__ import annotations


class EpiForecastError(Exception):
    """Base class for all errors raised by this package."""

    code = "error"


class ValidationError(EpiForecastError):
    """Bad argument or parameter (horizon < 1, unknown model name, ...)."""

    code = "validation"


class DataFormatError(EpiForecastError):
    """Malformed input data: unparseable CSV, calendar gaps, duplicates."""

    code = "data-format"


class RegionNotFoundError(EpiForecastError):
    code = "region-not-found"

    def __init__(self, region: str, available: list[str]):
        self.region = region
        self.available = list(available)
        super().__init__(
            f"region {region!r} not found; available regions: {', '.join(available)}"
        )


class InsufficientDataError(EpiForecastError):
    """Series too short for the requested operation."""

    code = "insufficient-data"


class NonPositiveValueError(EpiForecastError):
    """Log-scale model hit a nonpositive count under the strict zero policy."""

    code = "nonpositive-value"

    def __init__(self, month, value: float):
        self.month = month
        self.value = value
        super().__init__(
            f"cannot take log of value {value} at month {month}; "
            f"use a positive log offset or remove the zero"
        )


class SingularDesignError(EpiForecastError):
    """Design matrix is rank deficient; names the offending columns."""

    code = "singular-design"

    def __init__(self, columns: list[str]):
        self.columns = list(columns)
        super().__init__(
            "design matrix is rank deficient; offending columns: "
            + ", ".join(columns)
        )


class DegenerateInputError(EpiForecastError):
    """Zero-variance or otherwise degenerate input to a statistic."""

    code = "degenerate-input"


class UndefinedMetricError(EpiForecastError):
    """Metric has no defined value (e.g. MAPE with all actuals zero)."""

    code = "undefined-metric"


class AllWindowsFailedError(EpiForecastError):
    """Every rolling-forecast window failed to fit."""

    code = "all-windows-failed"

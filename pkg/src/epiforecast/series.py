"""Calendar-aware monthly series and design-matrix building blocks.

Months are the only supported resolution. A series is anchored at a start
month and stores consecutive monthly values; every model in this package
builds its regressors (seasonal dummies, polynomial time terms, lag-12
columns) from the helpers here so that fitting and forecasting share one
consistent calendar and time scaling.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import InsufficientDataError, ValidationError

MONTH_NAMES = (
    "jan", "feb", "mar", "apr", "may", "jun",
    "jul", "aug", "sep", "oct", "nov", "dec",
)


@dataclass(frozen=True, order=True)
class MonthDate:
    """A calendar month. Ordering is lexicographic on (year, month)."""

    year: int
    month: int

    def __post_init__(self):
        if not 1 <= self.month <= 12:
            raise ValidationError(f"month must be in 1..12, got {self.month}")

    def plus(self, months: int) -> "MonthDate":
        total = self.year * 12 + (self.month - 1) + months
        return MonthDate(total // 12, total % 12 + 1)

    def months_since(self, other: "MonthDate") -> int:
        return (self.year - other.year) * 12 + (self.month - other.month)

    @property
    def name(self) -> str:
        return MONTH_NAMES[self.month - 1]

    def __str__(self) -> str:
        return f"{self.year:04d}-{self.month:02d}"

    @classmethod
    def parse(cls, text: str) -> "MonthDate":
        parts = text.strip().split("-")
        if len(parts) != 2:
            raise ValidationError(f"expected YYYY-MM, got {text!r}")
        try:
            return cls(int(parts[0]), int(parts[1]))
        except ValueError as exc:
            raise ValidationError(f"expected YYYY-MM, got {text!r}") from exc


@dataclass(frozen=True, eq=False)
class MonthlySeries:
    """Consecutive monthly case counts for one region.

    Values are finite and non-negative; index ``i`` corresponds to
    ``start.plus(i)``. Immutable after construction.
    """

    start: MonthDate
    values: np.ndarray
    region: str = ""

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size < 1:
            raise ValidationError("series values must be a nonempty 1-d vector")
        if not np.all(np.isfinite(values)):
            raise ValidationError("series values must all be finite")
        if np.any(values < 0):
            raise ValidationError("series values must be non-negative")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, MonthlySeries):
            return NotImplemented
        return (
            self.start == other.start
            and self.region == other.region
            and np.array_equal(self.values, other.values)
        )

    def month_at(self, index: int) -> MonthDate:
        """Calendar month of observation ``index`` (0-based)."""
        if not 0 <= index < len(self):
            raise ValidationError(
                f"index {index} out of range for series of length {len(self)}"
            )
        return self.start.plus(index)

    @property
    def end(self) -> MonthDate:
        return self.start.plus(len(self) - 1)

    def months(self) -> list[MonthDate]:
        return [self.start.plus(i) for i in range(len(self))]

    def month_numbers(self) -> np.ndarray:
        """Calendar month (1..12) of each observation."""
        first = self.start.month - 1
        return (first + np.arange(len(self))) % 12 + 1

    def prefix(self, n: int) -> "MonthlySeries":
        """The first ``n`` observations as a new series."""
        if not 1 <= n <= len(self):
            raise ValidationError(f"prefix length {n} out of range")
        return MonthlySeries(self.start, self.values[:n], self.region)


def month_at(series: MonthlySeries, index: int) -> MonthDate:
    return series.month_at(index)


@dataclass(frozen=True)
class TimeScale:
    """Affine map applied to the raw time index before taking powers.

    Centering/scaling keeps polynomial columns well conditioned; the map is
    stored with the fitted model so forecasts extend the identical scaling
    to future months.
    """

    center: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if not self.scale > 0:
            raise ValidationError("time scale factor must be positive")

    def transform(self, raw) -> np.ndarray:
        return (np.asarray(raw, dtype=float) - self.center) / self.scale

    @classmethod
    def fit(cls, n: int) -> "TimeScale":
        """Center to mean 0 and unit standard deviation for raw index 1..n."""
        raw = np.arange(1, n + 1, dtype=float)
        sd = raw.std()
        return cls(center=float(raw.mean()), scale=float(sd) if sd > 0 else 1.0)

    @classmethod
    def identity(cls) -> "TimeScale":
        return cls()


@dataclass(frozen=True)
class TimeIndex:
    """Raw 1-based time positions together with their scaled image."""

    raw: np.ndarray
    scale: TimeScale

    @property
    def scaled(self) -> np.ndarray:
        return self.scale.transform(self.raw)

    @classmethod
    def for_series(cls, series: MonthlySeries, scale: TimeScale | None = None) -> "TimeIndex":
        n = len(series)
        return cls(np.arange(1, n + 1, dtype=float), scale or TimeScale.fit(n))


@dataclass(frozen=True)
class DesignMatrix:
    """Named columns, all of equal length."""

    matrix: np.ndarray
    names: tuple[str, ...]

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=float)
        if matrix.ndim != 2:
            raise ValidationError("design matrix must be 2-d")
        if matrix.shape[1] != len(self.names):
            raise ValidationError("number of column names must match columns")
        if len(set(self.names)) != len(self.names):
            raise ValidationError("design column names must be unique")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "names", tuple(self.names))

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_cols(self) -> int:
        return self.matrix.shape[1]

    def column(self, name: str) -> np.ndarray:
        return self.matrix[:, self.names.index(name)]

    def hstack(self, other: "DesignMatrix") -> "DesignMatrix":
        if other.n_rows != self.n_rows:
            raise ValidationError("cannot join designs with different row counts")
        return DesignMatrix(
            np.hstack([self.matrix, other.matrix]), self.names + other.names
        )

    def take_rows(self, start: int) -> "DesignMatrix":
        return DesignMatrix(self.matrix[start:], self.names)

    def __iter__(self) -> Iterator[tuple[str, np.ndarray]]:
        for j, name in enumerate(self.names):
            yield name, self.matrix[:, j]


def build_seasonal_dummies(series: MonthlySeries) -> DesignMatrix:
    """One 0/1 column per calendar month (full-dummy parameterization).

    Every row has exactly one 1, so the twelve columns jointly play the
    role of month-specific intercepts and no separate constant is added.
    """
    months = series.month_numbers()
    matrix = np.zeros((len(series), 12))
    matrix[np.arange(len(series)), months - 1] = 1.0
    return DesignMatrix(matrix, MONTH_NAMES)


def build_poly_terms(
    series: MonthlySeries, degree: int, scale: TimeScale | None = None
) -> DesignMatrix:
    """Powers 1..degree of the (affinely scaled) time index 1..n."""
    if degree < 1:
        raise ValidationError(f"polynomial degree must be >= 1, got {degree}")
    index = TimeIndex.for_series(series, scale)
    return poly_columns(index.raw, degree, index.scale)


def poly_columns(raw, degree: int, scale: TimeScale) -> DesignMatrix:
    scaled = scale.transform(raw)
    matrix = np.column_stack([scaled ** k for k in range(1, degree + 1)])
    names = tuple("t" if k == 1 else f"t{k}" for k in range(1, degree + 1))
    return DesignMatrix(matrix, names)


@dataclass(frozen=True)
class LaggedValues:
    """Series values shifted by ``lag``; positions before the lag are undefined."""

    values: np.ndarray
    defined: np.ndarray = field(repr=False)
    lag: int = 0

    @property
    def first_defined(self) -> int:
        return self.lag


def lag_values(series: MonthlySeries, lag: int) -> LaggedValues:
    """Align ``values[t - lag]`` at position ``t``; earlier rows are masked."""
    if lag < 1:
        raise ValidationError(f"lag must be >= 1, got {lag}")
    n = len(series)
    if lag >= n:
        raise InsufficientDataError(
            f"lag {lag} leaves no defined rows in a series of length {n}"
        )
    values = np.full(n, np.nan)
    values[lag:] = series.values[:-lag]
    defined = np.zeros(n, dtype=bool)
    defined[lag:] = True
    return LaggedValues(values=values, defined=defined, lag=lag)

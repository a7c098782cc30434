import numpy as np
import pytest

from epiforecast import MonthDate, MonthlySeries

SEASONAL = np.array(
    [500, 430, 380, 360, 400, 520, 760, 980, 900, 720, 620, 540], dtype=float
)


def seasonal_series(
    n: int = 48,
    seed: int = 0,
    noise_sd: float = 8.0,
    slope: float = 4.0,
    curvature: float = 0.03,
    start: MonthDate = MonthDate(2018, 1),
    region: str = "demo",
) -> MonthlySeries:
    """Seasonal pattern plus quadratic trend plus white noise, floored at 1."""
    rng = np.random.default_rng(seed)
    t = np.arange(1, n + 1)
    month_index = np.array([(start.plus(int(i)).month - 1) for i in range(n)])
    mean = SEASONAL[month_index] + slope * t + curvature * t * t
    values = np.maximum(mean + rng.normal(0, noise_sd, n), 1.0)
    return MonthlySeries(start, values, region=region)


@pytest.fixture
def series48() -> MonthlySeries:
    return seasonal_series(48)


def csv_from_columns(months: list[str], columns: dict[str, list]) -> str:
    header = "Date," + ",".join(columns)
    lines = [header]
    for i, month in enumerate(months):
        cells = [month] + [str(columns[name][i]) for name in columns]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def demo_csv(n: int = 48, regions: tuple[str, ...] = ("East", "West")) -> str:
    """Multi-region CSV built from seasonal_series with distinct seeds."""
    start = MonthDate(2019, 1)
    columns = {}
    for i, name in enumerate(regions):
        series = seasonal_series(n, seed=11 + i, start=start, region=name)
        columns[name] = [f"{v:.1f}" for v in series.values]
    months = [str(start.plus(i)) for i in range(n)]
    return csv_from_columns(months, columns)

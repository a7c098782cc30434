"""CSV ingestion: wide monthly tables plus sub-monthly aggregation.

Expected layout is one ``Date`` column (case-insensitive) and one column
per region. Dates may be written YYYY-MM, YYYY-MM-DD, or DD-MM-YYYY; the
style is detected from the first data row and must stay consistent within
a file. Rows must advance one month at a time with no gaps or repeats.
"""

from __future__ import annotations

import csv
import io
import logging
import re
from dataclasses import dataclass

import numpy as np

from .errors import DataFormatError, ValidationError
from .series import MonthDate, MonthlySeries

log = logging.getLogger(__name__)

_DATE_STYLES = {
    "ym": re.compile(r"^(\d{4})-(\d{2})$"),
    "ymd": re.compile(r"^(\d{4})-(\d{2})-(\d{2})$"),
    "dmy": re.compile(r"^(\d{2})-(\d{2})-(\d{4})$"),
}


@dataclass(frozen=True, eq=False)
class Dataset:
    """Parsed regions keyed by column name, all sharing one month range."""

    regions: dict[str, MonthlySeries]
    source_rows: int
    date_span: tuple[MonthDate, MonthDate]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.regions == other.regions
            and self.source_rows == other.source_rows
            and self.date_span == other.date_span
        )

    def region_names(self) -> list[str]:
        return sorted(self.regions)


def _detect_style(value: str) -> str:
    for style, pattern in _DATE_STYLES.items():
        if pattern.match(value):
            return style
    raise DataFormatError(
        f"unrecognized date {value!r}; expected YYYY-MM, YYYY-MM-DD, or DD-MM-YYYY"
    )


def _parse_date(value: str, style: str, row_number: int) -> MonthDate:
    match = _DATE_STYLES[style].match(value)
    if match is None:
        raise DataFormatError(
            f"row {row_number}: date {value!r} does not match the file's "
            f"date style established by the first row"
        )
    parts = [int(g) for g in match.groups()]
    if style == "dmy":
        _, month, year = parts
    else:
        year, month = parts[0], parts[1]
    try:
        return MonthDate(year, month)
    except ValidationError as exc:
        raise DataFormatError(f"row {row_number}: {exc}") from exc


def parse_csv(text: str, forward_fill: bool = False) -> Dataset:
    """Parse a wide monthly CSV into one series per region column.

    Empty numeric cells are rejected unless ``forward_fill`` is set, in
    which case they repeat the previous month's value (never the first
    row) and each fill is logged.
    """
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if any(cell.strip() for cell in row)]
    if not rows:
        raise DataFormatError("empty CSV: no header row")
    header = [cell.strip() for cell in rows[0]]
    date_col = None
    for i, name in enumerate(header):
        if name.lower() == "date":
            date_col = i
            break
    if date_col is None:
        raise DataFormatError(
            f"no Date column found; header columns are {header}"
        )
    region_cols = [(i, name) for i, name in enumerate(header) if i != date_col]
    if not region_cols:
        raise DataFormatError("no region columns besides Date")
    seen = set()
    for _, name in region_cols:
        if not name:
            raise DataFormatError("blank region column name in header")
        if name in seen:
            raise DataFormatError(f"duplicate region column {name!r}")
        seen.add(name)
    if len(rows) == 1:
        raise DataFormatError("CSV has a header but no data rows")

    style = None
    months: list[MonthDate] = []
    columns: dict[str, list[float]] = {name: [] for _, name in region_cols}
    for row_number, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DataFormatError(
                f"row {row_number}: expected {len(header)} cells, got {len(row)}"
            )
        raw_date = row[date_col].strip()
        if not raw_date:
            raise DataFormatError(f"row {row_number}: empty Date cell")
        if style is None:
            style = _detect_style(raw_date)
        month = _parse_date(raw_date, style, row_number)
        if months:
            expected = months[-1].plus(1)
            if month == months[-1]:
                raise DataFormatError(f"row {row_number}: duplicate month {month}")
            if month != expected:
                raise DataFormatError(
                    f"row {row_number}: expected {expected} after {months[-1]}, "
                    f"got {month}"
                )
        months.append(month)
        for col, name in region_cols:
            cell = row[col].strip()
            if not cell:
                if not forward_fill:
                    raise DataFormatError(
                        f"row {row_number}, column {name!r}: empty value "
                        f"(pass forward_fill to repeat the previous month)"
                    )
                if not columns[name]:
                    raise DataFormatError(
                        f"row {row_number}, column {name!r}: empty value in the "
                        f"first data row cannot be forward-filled"
                    )
                log.warning(
                    "forward-filling %s at %s from previous month", name, month
                )
                columns[name].append(columns[name][-1])
                continue
            try:
                value = float(cell)
            except ValueError:
                raise DataFormatError(
                    f"row {row_number}, column {name!r}: {cell!r} is not a number"
                ) from None
            if value < 0:
                raise DataFormatError(
                    f"row {row_number}, column {name!r}: negative value {cell}"
                )
            columns[name].append(value)

    start = months[0]
    regions = {}
    for _, name in region_cols:
        try:
            regions[name] = MonthlySeries(start, columns[name], region=name)
        except ValidationError as exc:
            raise DataFormatError(f"column {name!r}: {exc}") from exc
    return Dataset(
        regions=regions,
        source_rows=len(rows) - 1,
        date_span=(months[0], months[-1]),
    )


def write_csv(dataset: Dataset) -> str:
    """Render a dataset back to wide CSV with YYYY-MM-DD first-of-month dates."""
    names = dataset.region_names()
    if not names:
        raise ValidationError("dataset has no regions")
    first = dataset.regions[names[0]]
    for name in names[1:]:
        other = dataset.regions[name]
        if other.start != first.start or len(other) != len(first):
            raise ValidationError("regions must share one month range to write")
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["Date", *names])
    for i, month in enumerate(first.months()):
        cells = [f"{month}-01"]
        for name in names:
            value = float(dataset.regions[name].values[i])
            cells.append(str(int(value)) if value == int(value) else repr(value))
        writer.writerow(cells)
    return out.getvalue()


_TIMESTAMP = re.compile(r"^(\d{4})-(\d{2})-(\d{2})([T ].*)?$")


def aggregate_to_monthly(
    rows: list[tuple[str, float]], policy: str = "sum"
) -> list[tuple[MonthDate, float]]:
    """Collapse dated observations to one value per month.

    Timestamps must carry at least daily resolution (YYYY-MM-DD, optionally
    followed by a time of day). ``policy`` is "sum" for counts or "mean"
    for rates. Months appear in the output in first-seen order; calendar
    gaps are the caller's problem to detect.
    """
    if policy not in ("sum", "mean"):
        raise ValidationError(f"policy must be 'sum' or 'mean', got {policy!r}")
    if not rows:
        raise ValidationError("no rows to aggregate")
    buckets: dict[MonthDate, list[float]] = {}
    order: list[MonthDate] = []
    for i, (stamp, value) in enumerate(rows, start=1):
        match = _TIMESTAMP.match(stamp.strip())
        if match is None:
            raise DataFormatError(
                f"row {i}: timestamp {stamp!r} lacks daily resolution "
                f"(need at least YYYY-MM-DD)"
            )
        year, month, day = int(match[1]), int(match[2]), int(match[3])
        if not 1 <= day <= 31:
            raise DataFormatError(f"row {i}: day {day} out of range in {stamp!r}")
        try:
            key = MonthDate(year, month)
        except ValidationError as exc:
            raise DataFormatError(f"row {i}: {exc}") from exc
        if not np.isfinite(value):
            raise DataFormatError(f"row {i}: value {value!r} is not finite")
        if key not in buckets:
            buckets[key] = []
            order.append(key)
        buckets[key].append(float(value))
    result = []
    for key in order:
        values = buckets[key]
        total = sum(values)
        result.append((key, total if policy == "sum" else total / len(values)))
    return result

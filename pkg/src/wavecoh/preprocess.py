"""Ingestion and transformation of raw daily series into analysis-ready form.

All operations are pure functions over immutable series. Alignment is a
strict inner join on calendar dates; nothing is ever imputed, since filling
gaps would alter the spectral content the downstream transforms measure.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from datetime import date
from pathlib import Path

import numpy as np


class DataError(ValueError):
    """Raised when input data violates the ingestion contract."""


@dataclass(frozen=True)
class TimeSeries:
    """A named, date-indexed sequence of real daily observations."""

    name: str
    dates: np.ndarray  # datetime64[D], strictly increasing
    values: np.ndarray  # float64, finite

    def __post_init__(self):
        dates = np.asarray(self.dates, dtype="datetime64[D]")
        values = np.asarray(self.values, dtype=float)
        if dates.shape != values.shape or dates.ndim != 1:
            raise DataError("dates and values must be 1-d arrays of equal length")
        # Ingestion requires >= 2 observations (enforced in load_csv); derived
        # series such as a difference of a minimal series may be shorter.
        if len(dates) < 1:
            raise DataError(f"series {self.name!r} is empty")
        if not np.all(dates[1:] > dates[:-1]):
            bad = dates[1:][~(dates[1:] > dates[:-1])][0]
            raise DataError(f"series {self.name!r}: dates not strictly increasing at {bad}")
        if not np.all(np.isfinite(values)):
            bad = dates[~np.isfinite(values)][0]
            raise DataError(f"series {self.name!r}: non-finite value at {bad}")
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class AlignedPanel:
    """Series values on the intersection of their calendars."""

    dates: np.ndarray
    columns: dict[str, np.ndarray]

    @property
    def n(self) -> int:
        return len(self.dates)

    def series(self, label: str) -> TimeSeries:
        return TimeSeries(label, self.dates, self.columns[label])


@dataclass(frozen=True)
class OlsFit:
    """Ordinary least squares of y on an intercept and one regressor."""

    intercept: float
    slope: float
    residuals: np.ndarray


def load_csv(
    path: str | Path,
    date_column: str,
    value_column: str,
    delimiter: str = ",",
    name: str | None = None,
) -> TimeSeries:
    """Read one (date, value) series from a delimited text file.

    Dates must be ISO-8601 calendar dates; rows with an empty value cell are
    dropped with a warning carrying the drop count. Every other defect
    (missing column, bad date, duplicate date, non-numeric value) raises a
    DataError naming the offending row or date. Rows may appear in any order;
    the result is sorted chronologically.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"input file not found: {path}")
    dates: list[date] = []
    values: list[float] = []
    dropped = 0
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh, delimiter=delimiter)
        header = reader.fieldnames or []
        for col in (date_column, value_column):
            if col not in header:
                raise DataError(f"{path}: column {col!r} not in header {header}")
        for lineno, row in enumerate(reader, start=2):
            raw_value = (row[value_column] or "").strip()
            if raw_value == "":
                dropped += 1
                continue
            raw_date = (row[date_column] or "").strip()
            try:
                d = date.fromisoformat(raw_date)
            except ValueError:
                raise DataError(f"{path}:{lineno}: unparseable date {raw_date!r}") from None
            try:
                v = float(raw_value)
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric value {raw_value!r}") from None
            if not np.isfinite(v):
                raise DataError(f"{path}:{lineno}: non-finite value {raw_value!r}")
            dates.append(d)
            values.append(v)
    if dropped:
        warnings.warn(f"{path}: dropped {dropped} rows with empty values", stacklevel=2)
    if len(dates) != len(set(dates)):
        seen = set()
        for d in dates:
            if d in seen:
                raise DataError(f"{path}: duplicate date {d.isoformat()}")
            seen.add(d)
    if len(dates) < 2:
        raise DataError(f"{path}: need at least 2 usable observations, got {len(dates)}")
    order = np.argsort(np.array(dates, dtype="datetime64[D]"), kind="stable")
    darr = np.array(dates, dtype="datetime64[D]")[order]
    varr = np.array(values, dtype=float)[order]
    return TimeSeries(name or value_column, darr, varr)


def align(series: list[TimeSeries]) -> AlignedPanel:
    """Inner-join two or more series on their shared dates.

    Column order follows the input order; an empty intersection is an error.
    """
    if len(series) < 2:
        raise DataError("alignment needs at least 2 series")
    labels = [s.name for s in series]
    if len(set(labels)) != len(labels):
        raise DataError(f"duplicate series labels in {labels}")
    common = series[0].dates
    for s in series[1:]:
        common = np.intersect1d(common, s.dates)
    if len(common) == 0:
        raise DataError("series share no dates")
    columns = {}
    for s in series:
        idx = np.searchsorted(s.dates, common)
        columns[s.name] = s.values[idx]
    return AlignedPanel(dates=common, columns=columns)


def log_diff(s: TimeSeries) -> TimeSeries:
    """First difference of the natural log, dated at the later observation."""
    if np.any(s.values <= 0):
        bad = s.dates[s.values <= 0][0]
        raise DataError(f"series {s.name!r}: non-positive value at {bad}, cannot log-difference")
    return TimeSeries(s.name, s.dates[1:], np.diff(np.log(s.values)))


def diff(s: TimeSeries) -> TimeSeries:
    """Plain first difference, dated at the later observation."""
    return TimeSeries(s.name, s.dates[1:], np.diff(s.values))


def lag(s: TimeSeries, k: int) -> TimeSeries:
    """Shift values forward k positions: the value at date t is the original
    value k observations earlier; the first k dates are dropped."""
    if k < 0:
        raise DataError("lag must be nonnegative")
    if k == 0:
        return s
    if k >= len(s):
        raise DataError(f"lag {k} >= series length {len(s)}")
    return TimeSeries(s.name, s.dates[k:], s.values[: len(s) - k])


def fatality_ratio(deaths: TimeSeries, cases: TimeSeries, name: str = "fatality_ratio") -> TimeSeries:
    """Elementwise deaths/cases on a shared calendar."""
    if not np.array_equal(deaths.dates, cases.dates):
        raise DataError("deaths and cases must be aligned on the same dates")
    if np.any(cases.values <= 0):
        bad = cases.dates[cases.values <= 0][0]
        raise DataError(f"non-positive case count at {bad}")
    return TimeSeries(name, deaths.dates, deaths.values / cases.values)


def orthogonalize(y: TimeSeries, x: TimeSeries) -> OlsFit:
    """OLS of y on an intercept and x; residuals are the purged series.

    The residuals have zero mean and zero sample covariance with the
    regressor by construction.
    """
    if len(y) != len(x) or not np.array_equal(y.dates, x.dates):
        raise DataError("orthogonalization requires equal, aligned series")
    if len(y) < 3:
        raise DataError("orthogonalization needs at least 3 observations")
    xv, yv = x.values, y.values
    xd = xv - xv.mean()
    sxx = float(xd @ xd)
    if sxx == 0.0:
        raise DataError(f"regressor {x.name!r} is constant")
    slope = float(xd @ (yv - yv.mean())) / sxx
    intercept = float(yv.mean() - slope * xv.mean())
    residuals = yv - (intercept + slope * xv)
    return OlsFit(intercept=intercept, slope=slope, residuals=residuals)

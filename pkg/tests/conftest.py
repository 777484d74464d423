import numpy as np
import pytest

from wavecoh import ScaleGrid, TimeSeries


@pytest.fixture
def rng():
    return np.random.default_rng(20200218)


@pytest.fixture
def grid():
    return ScaleGrid.from_range()


@pytest.fixture
def coarse_grid():
    # Small grid for tests that loop; 2 scales per octave up to 16 days.
    return ScaleGrid.from_range(dj=0.5, max_period=16.0)


def make_series(values, start="2020-01-01", name="s"):
    values = np.asarray(values, dtype=float)
    dates = np.datetime64(start) + np.arange(len(values))
    return TimeSeries(name, dates, values)


@pytest.fixture
def series_factory():
    return make_series


def market_calendar():
    """Weekday calendar Feb 18 - Aug 14 2020 minus the two federal holidays,
    as published for daily commodity spot prices: 127 dates."""
    days = np.arange(
        np.datetime64("2020-02-18"), np.datetime64("2020-08-15"), dtype="datetime64[D]"
    )
    days = days[np.is_busday(days)]
    holidays = np.array(["2020-05-25", "2020-07-03"], dtype="datetime64[D]")
    return days[~np.isin(days, holidays)]


@pytest.fixture
def trading_days():
    return market_calendar()

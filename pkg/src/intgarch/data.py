"""Market data ingestion and baselines: return ranges from OHLC bars,
realized volatility from intraday ticks, a GARCH(1,1) reference fit, and all
CSV read/write formats used by the command-line tools.
"""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.signal import lfilter

from .errors import BadBar, DegenerateSeries, InsufficientData, NumericalFailure, ParseError
from .intervals import RangeSeries

__all__ = [
    "DailyOhlc",
    "IntradaySeries",
    "Garch11Fit",
    "return_ranges",
    "realized_volatility",
    "fit_garch11",
    "flag_quiet_wide_days",
    "read_ohlc_csv",
    "read_intraday_csv",
    "read_series_csv",
    "write_series_csv",
    "write_h_csv",
    "write_acf_csv",
    "write_flags_csv",
    "write_comparison_csv",
]

OHLC_HEADER = ["date", "open", "high", "low", "close"]
INTRADAY_HEADER = ["timestamp", "price"]
SERIES_HEADER = ["date", "low", "high", "center", "radius"]
COMPARISON_HEADER = ["date", "intgarch_H", "garch_sigma", "rv"]


@dataclass(frozen=True)
class DailyOhlc:
    date: dt.date
    open: float
    high: float
    low: float
    close: float

    def __post_init__(self):
        if min(self.open, self.high, self.low, self.close) <= 0.0:
            raise BadBar(f"nonpositive price in bar {self.date}")
        if not (self.low <= self.open <= self.high and self.low <= self.close <= self.high):
            raise BadBar(f"open/close outside [low, high] in bar {self.date}")


@dataclass
class IntradaySeries:
    date: dt.date
    times: list
    prices: np.ndarray

    def __post_init__(self):
        self.prices = np.asarray(self.prices, dtype=float)
        if len(self.times) != self.prices.size:
            raise ValueError("times and prices must have equal length")
        if np.any(self.prices <= 0.0):
            raise ValueError("prices must be > 0")
        for a, b in zip(self.times, self.times[1:]):
            if not a < b:
                raise ValueError("timestamps must be strictly increasing")


def return_ranges(days: list[DailyOhlc]) -> RangeSeries:
    """Interval returns from consecutive daily [low, high] log price ranges.

    Day t maps to [log L_t - log H_{t-1}, log H_t - log L_{t-1}]; the first
    input day is consumed as the lag, so n days yield n - 1 intervals. The
    interval length always equals the sum of the two days' high-low log
    ranges.
    """
    if len(days) < 2:
        raise InsufficientData("need at least 2 daily bars to form a return range")
    for i, (a, b) in enumerate(zip(days, days[1:])):
        if not a.date < b.date:
            raise BadBar(f"dates must be strictly increasing ({a.date} !< {b.date})", row=i + 1)
    lo = np.log([d.low for d in days])
    hi = np.log([d.high for d in days])
    lower = lo[1:] - hi[:-1]
    upper = hi[1:] - lo[:-1]
    centers = 0.5 * (lower + upper)
    radii = 0.5 * (upper - lower)
    return RangeSeries([d.date for d in days[1:]], centers, radii)


def realized_volatility(day: IntradaySeries, grid_minutes: int) -> float:
    """Square root of the summed squared log returns on a fixed minute grid.

    Ticks are resampled last-tick (previous tick carried forward) onto a grid
    anchored at the first observation of the session; duplicated ticks
    between grid points therefore do not change the value.
    """
    if grid_minutes < 1:
        raise ValueError("grid_minutes must be a positive integer")
    t0 = day.times[0]
    secs = np.array([(t - t0).total_seconds() for t in day.times])
    step = 60.0 * grid_minutes
    n_points = int(secs[-1] // step) + 1
    if n_points < 2:
        raise InsufficientData(
            f"fewer than 2 grid prices at {grid_minutes}-minute sampling"
        )
    grid = np.arange(n_points) * step
    idx = np.searchsorted(secs, grid, side="right") - 1
    log_p = np.log(day.prices[idx])
    diffs = np.diff(log_p)
    return float(math.sqrt(diffs @ diffs))


@dataclass
class Garch11Fit:
    omega: float
    a: float
    b: float
    sigma: np.ndarray


def _garch11_sigma2(omega, a, b, r2, s2_0) -> np.ndarray:
    # s2_t = omega + a r2_{t-1} + b s2_{t-1}; first element is s2_0
    u = omega + a * np.concatenate(([s2_0], r2[:-1]))
    u[0] = s2_0
    return lfilter([1.0], [1.0, -b], u, zi=np.array([0.0]))[0]


def fit_garch11(returns) -> Garch11Fit:
    """Gaussian quasi-ML GARCH(1,1) on (demeaned) returns, variance form.

    The stationarity constraint a + b < 1 is enforced by the bounded search;
    returns the fitted conditional standard-deviation path.
    """
    r = np.asarray(returns, dtype=float)
    if r.size < 50:
        raise InsufficientData(f"GARCH fit needs at least 50 returns, got {r.size}")
    if np.all(r == r[0]):
        raise DegenerateSeries("constant returns have no conditional variance")
    v = float(r.var())
    z = (r - r.mean()) / math.sqrt(v)  # unit-variance working series
    z2 = z * z

    def nll(x):
        omega, a, b = x
        if a + b >= 0.9999:
            return 1e10 * (1.0 + a + b)
        s2 = _garch11_sigma2(omega, a, b, z2, 1.0)
        if np.any(s2 <= 0.0) or not np.all(np.isfinite(s2)):
            return 1e10
        return float(0.5 * np.sum(np.log(s2) + z2 / s2))

    res = minimize(
        nll,
        x0=np.array([0.05, 0.05, 0.90]),
        method="L-BFGS-B",
        bounds=[(1e-8, None), (0.0, 0.9999), (0.0, 0.9999)],
    )
    if not np.all(np.isfinite(res.x)) or not math.isfinite(res.fun):
        raise NumericalFailure("GARCH(1,1) optimizer returned non-finite values")
    omega, a, b = res.x
    if a + b >= 1.0:
        raise NumericalFailure("GARCH(1,1) search ended outside the stationary region")
    s2 = _garch11_sigma2(omega, a, b, z2, 1.0)
    return Garch11Fit(omega=float(omega * v), a=float(a), b=float(b), sigma=np.sqrt(s2 * v))


def flag_quiet_wide_days(series: RangeSeries) -> np.ndarray:
    """Days whose interval length is above the 75% quantile while the absolute
    center sits below the 25% quantile (long range, small average return).
    Quantiles use the full sample with linear interpolation.
    """
    lengths = 2.0 * series.radii
    abs_centers = np.abs(series.centers)
    hi = np.percentile(lengths, 75)
    lo = np.percentile(abs_centers, 25)
    return (lengths > hi) & (abs_centers < lo)


# --- CSV formats ---------------------------------------------------------

_FMT = "%.17g"


def _fmt(x: float) -> str:
    return _FMT % x


def _read_rows(path, expected_header: list[str]):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(1, "missing header") from None
        if [c.strip() for c in header] != expected_header:
            raise ParseError(1, f"expected header {','.join(expected_header)}")
        return list(reader)


def _parse_date(text: str, line: int) -> dt.date:
    try:
        return dt.date.fromisoformat(text)
    except ValueError:
        raise ParseError(line, f"bad ISO date {text!r}") from None


def _parse_float(text: str, line: int, what: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ParseError(line, f"bad {what} {text!r}") from None


def read_ohlc_csv(path) -> list[DailyOhlc]:
    """Daily bars from `date,open,high,low,close` (ISO dates, positive prices)."""
    rows = _read_rows(path, OHLC_HEADER)
    days = []
    prev_date = None
    for i, row in enumerate(rows):
        line = i + 2
        if len(row) != 5:
            raise ParseError(line, f"expected 5 fields, got {len(row)}")
        date = _parse_date(row[0], line)
        o, h, lo, c = (_parse_float(row[j], line, OHLC_HEADER[j]) for j in range(1, 5))
        if min(o, h, lo, c) <= 0.0:
            raise BadBar("nonpositive price", row=line)
        if not (lo <= o <= h and lo <= c <= h):
            raise BadBar("open/close outside [low, high]", row=line)
        if prev_date is not None and not prev_date < date:
            raise ParseError(line, f"dates must be strictly increasing ({prev_date} !< {date})")
        prev_date = date
        days.append(DailyOhlc(date, o, h, lo, c))
    return days


def _parse_timestamp(text: str, line: int) -> dt.datetime:
    try:
        ts = dt.datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError:
        raise ParseError(line, f"bad ISO timestamp {text!r}") from None
    if ts.tzinfo is None:
        raise ParseError(line, f"timestamp {text!r} lacks a timezone offset")
    return ts


def read_intraday_csv(path) -> list[IntradaySeries]:
    """Intraday ticks from `timestamp,price`, split into one series per date."""
    rows = _read_rows(path, INTRADAY_HEADER)
    by_day: dict = {}
    prev_ts = None
    for i, row in enumerate(rows):
        line = i + 2
        if len(row) != 2:
            raise ParseError(line, f"expected 2 fields, got {len(row)}")
        ts = _parse_timestamp(row[0], line)
        price = _parse_float(row[1], line, "price")
        if price <= 0.0:
            raise BadBar("nonpositive price", row=line)
        if prev_ts is not None and not prev_ts < ts:
            raise ParseError(line, "timestamps must be strictly increasing")
        prev_ts = ts
        by_day.setdefault(ts.date(), ([], []))
        by_day[ts.date()][0].append(ts)
        by_day[ts.date()][1].append(price)
    return [
        IntradaySeries(date=d, times=times, prices=np.array(prices))
        for d, (times, prices) in sorted(by_day.items())
    ]


def _timestamp_str(t) -> str:
    return t.isoformat() if isinstance(t, (dt.date, dt.datetime)) else str(t)


def _timestamp_from_str(text: str, line: int):
    try:
        return dt.date.fromisoformat(text)
    except ValueError:
        pass
    try:
        return int(text)
    except ValueError:
        raise ParseError(line, f"bad date {text!r} (ISO date or integer index)") from None


def write_series_csv(series: RangeSeries, path) -> None:
    """Range series as `date,low,high,center,radius` at 17 significant digits."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SERIES_HEADER)
        for t, c, r in zip(series.timestamps, series.centers, series.radii):
            writer.writerow([_timestamp_str(t), _fmt(c - r), _fmt(c + r), _fmt(c), _fmt(r)])


def read_series_csv(path) -> RangeSeries:
    """Inverse of write_series_csv; center/radius columns are authoritative."""
    rows = _read_rows(path, SERIES_HEADER)
    timestamps, centers, radii = [], [], []
    for i, row in enumerate(rows):
        line = i + 2
        if len(row) != 5:
            raise ParseError(line, f"expected 5 fields, got {len(row)}")
        timestamps.append(_timestamp_from_str(row[0], line))
        centers.append(_parse_float(row[3], line, "center"))
        radius = _parse_float(row[4], line, "radius")
        if radius < 0.0:
            raise ParseError(line, f"negative radius {radius}")
        radii.append(radius)
    try:
        return RangeSeries(timestamps, centers, radii)
    except ValueError as exc:
        raise ParseError(len(rows) + 1, str(exc)) from None


def write_h_csv(timestamps, values, path, column: str = "h") -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", column])
        for t, v in zip(timestamps, values):
            writer.writerow([_timestamp_str(t), _fmt(v)])


def write_acf_csv(lags, values, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lag", "acf"])
        for s, v in zip(lags, values):
            writer.writerow([int(s), _fmt(v)])


def write_flags_csv(series: RangeSeries, flags, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "length", "abs_center", "flagged"])
        for t, c, r, f in zip(series.timestamps, series.centers, series.radii, flags):
            writer.writerow([_timestamp_str(t), _fmt(2.0 * r), _fmt(abs(c)), int(f)])


def write_comparison_csv(timestamps, intgarch_h, garch_sigma, rv, path) -> None:
    """Volatility comparison table; None entries render as empty cells."""

    def cell(v):
        return "" if v is None else _fmt(v)

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(COMPARISON_HEADER)
        for t, a, b, c in zip(timestamps, intgarch_h, garch_sigma, rv):
            writer.writerow([_timestamp_str(t), cell(a), cell(b), cell(c)])

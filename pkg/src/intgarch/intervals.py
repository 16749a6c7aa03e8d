"""Interval arithmetic, metrics, and sample statistics for random intervals.

An interval is stored as (center, radius) rather than endpoints: the model
equations are all written in center/radius coordinates, and radius >= 0
becomes a structural invariant instead of a runtime check. Endpoints are
derived accessors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import DegenerateSeries, EmptySeries, InsufficientData

__all__ = [
    "Interval",
    "RangeSeries",
    "minkowski_add",
    "scalar_mul",
    "hausdorff",
    "delta_metric",
    "sample_mean",
    "sample_var",
    "sample_cov",
    "sample_corr",
]


@dataclass(frozen=True)
class Interval:
    """A compact real interval [center - radius, center + radius]."""

    center: float
    radius: float

    def __post_init__(self):
        if not (self.radius >= 0.0):
            raise ValueError(f"radius must be >= 0, got {self.radius}")

    @classmethod
    def from_endpoints(cls, lower: float, upper: float) -> "Interval":
        if lower > upper:
            raise ValueError(f"lower endpoint {lower} exceeds upper {upper}")
        return cls(0.5 * (lower + upper), 0.5 * (upper - lower))

    @property
    def lower(self) -> float:
        return self.center - self.radius

    @property
    def upper(self) -> float:
        return self.center + self.radius

    @property
    def length(self) -> float:
        return 2.0 * self.radius

    def __add__(self, other: "Interval") -> "Interval":
        return minkowski_add(self, other)

    def __rmul__(self, c: float) -> "Interval":
        return scalar_mul(c, self)


class RangeSeries:
    """Time-indexed sequence of intervals with aligned center/radius arrays.

    Timestamps must be strictly increasing; they may be integers (simulation
    step indices) or dates. The center and radius arrays are frozen after
    construction, so a series can be shared freely across threads.
    """

    __slots__ = ("timestamps", "centers", "radii")

    def __init__(self, timestamps: Sequence, centers, radii):
        centers = np.asarray(centers, dtype=float)
        radii = np.asarray(radii, dtype=float)
        timestamps = list(timestamps)
        if not (len(timestamps) == centers.size == radii.size):
            raise ValueError("timestamps, centers, and radii must have equal length")
        if np.any(radii < 0.0):
            raise ValueError("all radii must be >= 0")
        for a, b in zip(timestamps, timestamps[1:]):
            if not a < b:
                raise ValueError(f"timestamps must be strictly increasing ({a!r} !< {b!r})")
        centers.flags.writeable = False
        radii.flags.writeable = False
        self.timestamps = timestamps
        self.centers = centers
        self.radii = radii

    @classmethod
    def from_intervals(cls, intervals: Sequence[Interval], timestamps=None) -> "RangeSeries":
        if timestamps is None:
            timestamps = range(len(intervals))
        return cls(
            timestamps,
            [iv.center for iv in intervals],
            [iv.radius for iv in intervals],
        )

    def __len__(self) -> int:
        return self.centers.size

    def __getitem__(self, i: int) -> Interval:
        return Interval(float(self.centers[i]), float(self.radii[i]))

    def __iter__(self) -> Iterator[Interval]:
        for c, r in zip(self.centers, self.radii):
            yield Interval(float(c), float(r))

    @property
    def intervals(self) -> list[Interval]:
        return list(self)


def minkowski_add(a: Interval, b: Interval) -> Interval:
    """Set sum {x + y : x in a, y in b}; endpoint-wise addition."""
    return Interval(a.center + b.center, a.radius + b.radius)


def scalar_mul(c: float, a: Interval) -> Interval:
    """Set image {c * x : x in a}; the radius scales by |c|."""
    return Interval(c * a.center, abs(c) * a.radius)


def hausdorff(a: Interval, b: Interval) -> float:
    """Hausdorff distance: max of the two endpoint gaps."""
    return max(abs(a.lower - b.lower), abs(a.upper - b.upper))


def delta_metric(a: Interval, b: Interval) -> float:
    """L2 metric on support functions: root-mean-square of the endpoint gaps.

    For one-dimensional intervals the support function takes two values
    (at directions -1 and +1), each carrying normalized measure 1/2, so
    the metric reduces to sqrt(((dl)^2 + (du)^2) / 2).
    """
    dl = a.lower - b.lower
    du = a.upper - b.upper
    return math.sqrt(0.5 * (dl * dl + du * du))


def _require_nonempty(s: RangeSeries) -> None:
    if len(s) == 0:
        raise EmptySeries("operation requires a non-empty series")


def sample_mean(s: RangeSeries) -> Interval:
    """Sample Aumann mean: the interval of componentwise means."""
    _require_nonempty(s)
    return Interval(float(s.centers.mean()), float(s.radii.mean()))


def _autocov(values: np.ndarray, lag: int) -> float:
    # n-1 divisor at lag 0, 1/n with full-sample mean-centering at lags > 0;
    # applied identically to centers and radii so ACF ratios stay consistent
    n = values.size
    h = abs(lag)
    centered = values - values.mean()
    if h == 0:
        return float(centered @ centered) / (n - 1)
    return float(centered[: n - h] @ centered[h:]) / n


def sample_var(s: RangeSeries) -> float:
    """Sample variance of a random interval: center variance plus radius variance."""
    if len(s) < 2:
        raise InsufficientData("sample variance needs at least 2 observations")
    return _autocov(s.centers, 0) + _autocov(s.radii, 0)


def sample_cov(s: RangeSeries, lag: int) -> float:
    """Lag-h sample autocovariance: center autocovariance plus radius autocovariance."""
    if len(s) <= abs(lag) + 1:
        raise InsufficientData(f"series of length {len(s)} too short for lag {lag}")
    return _autocov(s.centers, lag) + _autocov(s.radii, lag)


def sample_corr(s: RangeSeries, lag: int) -> float:
    """Sample interval ACF: summed component autocovariances over summed variances."""
    if len(s) <= abs(lag) + 1:
        raise InsufficientData(f"series of length {len(s)} too short for lag {lag}")
    denom = _autocov(s.centers, 0) + _autocov(s.radii, 0)
    if denom == 0.0:
        raise DegenerateSeries("constant series has zero variance")
    if lag == 0:
        return 1.0
    return (_autocov(s.centers, lag) + _autocov(s.radii, lag)) / denom

"""
Time-series container, block partitioning, thresholds and exceedance counts.

Indices in this module are 0-based; the observation written ``X_i`` with
``1 <= i <= n`` in the usual notation is ``values[i - 1]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from os import PathLike
from typing import Union

import numpy as np

from .errors import DegenerateThresholdError

__all__ = [
    "BlockScheme",
    "EmpiricalQuantile",
    "Fixed",
    "OrderStatistic",
    "OrthantSetPair",
    "ThresholdSpec",
    "TimeSeries",
    "as_series",
    "estimate_threshold",
    "estimate_vn",
    "exceedance_indicators",
    "max_norm",
    "order_statistic",
    "partition_blocks",
    "read_series_csv",
    "write_series_csv",
]


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """
    Ordered real observations, scalar (shape ``(n,)``) or vector (``(n, d)``).

    Parameters
    ----------
    values : array_like
        Finite observations.  Stored as a read-only float64 array.
    """

    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64)
        if arr.ndim not in (1, 2):
            raise ValueError("series must be one- or two-dimensional")
        if arr.shape[0] < 1:
            raise ValueError("series must contain at least one observation")
        if arr.ndim == 2 and arr.shape[1] == 1:
            arr = arr[:, 0]
        if not np.all(np.isfinite(arr)):
            raise ValueError("series contains NaN or infinite values")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def length(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return 1 if self.values.ndim == 1 else self.values.shape[1]

    def effective_length(self, h_max: int) -> int:
        """Number of summands ``n = n_total - h_max`` available for lags up to ``h_max``."""
        n = self.length - int(h_max)
        if h_max < 0 or n < 1:
            raise ValueError(f"h_max={h_max} leaves no observations in a series of length {self.length}")
        return n

    def scaled(self, c: float) -> "TimeSeries":
        return TimeSeries(self.values * c)


SeriesLike = Union[TimeSeries, np.ndarray, list, tuple]


def as_series(x: SeriesLike) -> TimeSeries:
    return x if isinstance(x, TimeSeries) else TimeSeries(x)


def read_series_csv(path: str | PathLike, header: bool = False) -> TimeSeries:
    """Read one observation per row, ``d`` comma-separated columns for vector series."""
    data = np.loadtxt(path, delimiter=",", skiprows=1 if header else 0, dtype=np.float64, ndmin=1)
    return TimeSeries(data)


def write_series_csv(series: SeriesLike, path: str | PathLike, header: bool = False) -> None:
    series = as_series(series)
    vals = series.values.reshape(series.length, -1)
    head = ",".join(f"x{j + 1}" for j in range(vals.shape[1])) if header else ""
    np.savetxt(path, vals, delimiter=",", fmt="%.17g", header=head, comments="")


@dataclass(frozen=True)
class BlockScheme:
    """
    Partition of ``n`` observations into ``m = n // r`` disjoint blocks.

    Observations ``m * r, ..., n - 1`` (0-based) are excluded from block sums.
    """

    n: int
    block_length: int
    block_count: int = field(init=False)

    def __post_init__(self):
        if not 1 <= self.block_length <= self.n:
            raise ValueError(f"block length must satisfy 1 <= r_n <= n={self.n}, got {self.block_length}")
        object.__setattr__(self, "block_count", self.n // self.block_length)

    @property
    def covered(self) -> int:
        """Number of observations inside blocks, ``m * r``."""
        return self.block_count * self.block_length

    @property
    def excluded(self) -> range:
        return range(self.covered, self.n)

    def ranges(self) -> list[range]:
        r = self.block_length
        return [range(j * r, (j + 1) * r) for j in range(self.block_count)]

    def block_sums(self, x: np.ndarray) -> np.ndarray:
        """Sum ``x[0:n]`` over each block along the first axis."""
        x = np.asarray(x)
        return x[: self.covered].reshape((self.block_count, self.block_length) + x.shape[1:]).sum(axis=1)


def partition_blocks(series: SeriesLike | int, r_n: int, n: int | None = None) -> BlockScheme:
    """
    Partition the first ``n`` observations into blocks of length ``r_n``.

    ``series`` may also be the integer ``n`` itself.
    """
    if n is None:
        n = series if isinstance(series, (int, np.integer)) else as_series(series).length
    return BlockScheme(int(n), int(r_n))


@dataclass(frozen=True)
class OrderStatistic:
    """Threshold at the ``floor(n/k) + 1``-th largest max-norm."""

    k: float

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError("OrderStatistic requires k > 0")


@dataclass(frozen=True)
class EmpiricalQuantile:
    """Threshold at the empirical ``(1 - p)``-quantile (type 1)."""

    p: float

    def __post_init__(self):
        if not 0 < self.p < 1:
            raise ValueError("EmpiricalQuantile requires 0 < p < 1")


@dataclass(frozen=True)
class Fixed:
    a: float

    def __post_init__(self):
        if not self.a > 0:
            raise DegenerateThresholdError(f"fixed threshold must be positive, got {self.a}")


ThresholdSpec = Union[OrderStatistic, EmpiricalQuantile, Fixed]


def max_norm(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values)
    return np.abs(values) if values.ndim == 1 else np.abs(values).max(axis=1)


def order_statistic(x: np.ndarray, j: int) -> float:
    """The ``j``-th smallest value (1-based)."""
    # the value does not depend on how ties are ordered, so a partial sort suffices
    return float(np.partition(np.asarray(x), j - 1)[j - 1])


def estimate_threshold(series: SeriesLike, spec: ThresholdSpec, n: int | None = None) -> float:
    """
    Threshold estimate from the first ``n`` observations (default: all).

    ``OrderStatistic(k)`` uses the max-norm; ``EmpiricalQuantile(p)`` uses the
    signed values, or the coordinatewise maximum for vector series.
    """
    series = as_series(series)
    n = series.length if n is None else int(n)
    if not 1 <= n <= series.length:
        raise ValueError(f"n={n} outside 1..{series.length}")
    vals = series.values[:n]
    if isinstance(spec, Fixed):
        a = float(spec.a)
    elif isinstance(spec, OrderStatistic):
        top = math.floor(n / spec.k)
        if top < 1 or n - top < 1:
            raise ValueError(f"OrderStatistic(k={spec.k}) needs 1 <= floor(n/k) < n for n={n}")
        a = order_statistic(max_norm(vals), n - top)
    elif isinstance(spec, EmpiricalQuantile):
        x = vals if vals.ndim == 1 else vals.max(axis=1)
        # ceil((1-p) n), guarded against 0.95*100 = 95.00000000000001
        j = max(1, math.ceil(round((1.0 - spec.p) * n, 9)))
        a = order_statistic(x, j)
    else:
        raise TypeError(f"unknown threshold spec {spec!r}")
    if not a > 0:
        raise DegenerateThresholdError(f"threshold {a} is not positive (spec {spec})")
    return a


@dataclass(frozen=True, eq=False)
class OrthantSetPair:
    """
    Upper orthants ``A = scale * (lower_A, inf)`` and ``B = scale * (lower_B, inf)``.

    Membership is strict in every coordinate.
    """

    lower_A: np.ndarray | float = 1.0
    lower_B: np.ndarray | float = 1.0
    scale: float = 1.0

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        object.__setattr__(self, "lower_A", np.asarray(self.lower_A, dtype=np.float64))
        object.__setattr__(self, "lower_B", np.asarray(self.lower_B, dtype=np.float64))

    def scaled(self, lam: float) -> "OrthantSetPair":
        return OrthantSetPair(self.lower_A, self.lower_B, self.scale * lam)

    def _inside(self, values: np.ndarray, corner: np.ndarray, a: float) -> np.ndarray:
        cut = a * self.scale * corner
        above = np.asarray(values) > cut
        return above if above.ndim == 1 else above.all(axis=1)

    def in_A(self, values: np.ndarray, a: float = 1.0) -> np.ndarray:
        """Indicator of ``values / a`` lying in ``A``."""
        return self._inside(values, self.lower_A, a)

    def in_B(self, values: np.ndarray, a: float = 1.0) -> np.ndarray:
        return self._inside(values, self.lower_B, a)

    def __eq__(self, other):
        if not isinstance(other, OrthantSetPair):
            return NotImplemented
        return (
            np.array_equal(self.lower_A, other.lower_A)
            and np.array_equal(self.lower_B, other.lower_B)
            and self.scale == other.scale
        )

    def __hash__(self):
        return hash((self.lower_A.tobytes(), self.lower_B.tobytes(), self.scale))


def exceedance_indicators(
    series: SeriesLike, a: float, set_pair: OrthantSetPair, lag: int, n: int | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """
    Marginal and joint exceedance indicators for ``i = 1..n``.

    Returns
    -------
    marginal : ndarray of int8
        ``1{X_i / a in A}``
    joint : ndarray of int8
        ``1{X_i / a in A, X_{i+lag} / a in B}``
    """
    series = as_series(series)
    n = series.length - lag if n is None else int(n)
    if lag < 0 or n < 1 or n + lag > series.length:
        raise ValueError(f"series of length {series.length} is too short for n={n}, lag={lag}")
    vals = series.values
    marginal = set_pair.in_A(vals[:n], a)
    joint = marginal & set_pair.in_B(vals[lag : lag + n], a)
    return marginal.astype(np.int8), joint.astype(np.int8)


def estimate_vn(series: SeriesLike, a: float, x_star: float, n: int | None = None) -> float:
    """Fraction of ``X_1..X_n`` outside ``(-inf, a * x_star)^d``."""
    series = as_series(series)
    n = series.length if n is None else int(n)
    vals = series.values[:n]
    top = vals if vals.ndim == 1 else vals.max(axis=1)
    return float(np.count_nonzero(top >= a * x_star)) / n

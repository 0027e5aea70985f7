"""
Bootstrap replicates of the extremogram and the intervals built from them.

Three schemes are provided:

``multiplier``
    Disjoint blocks of length ``r`` reweighted by ``1 + xi_j`` in numerator
    and denominator, with i.i.d. mean-zero, unit-variance multipliers.
``stationary_dmc``
    Stationary bootstrap of the series itself (geometric block lengths with
    mean ``r``, uniform start points), extremogram recomputed on the
    resample.
``stationary_modified``
    The same block scheme applied to the pairs ``(X_t, X_{t+h})`` so that
    only observations that are truly ``h`` apart are compared.

Replicate values are not clipped to [0, 1]: negative weights ``1 + xi_j``
make signed values possible and they enter the quantiles as they are.
"""
from __future__ import annotations

import csv
import logging
import math
import os
from dataclasses import dataclass

import numpy as np
from numpy.random import Generator

from . import rng as rngmod
from .core import BlockScheme, OrthantSetPair, SeriesLike, ThresholdSpec, as_series, estimate_threshold
from .errors import NoBandError, NoIntervalError
from .extremogram import DEFAULT_PAIR, ExtremogramEstimate, empirical_extremogram
from .models import sample_multipliers

__all__ = [
    "BootstrapReplicates",
    "ConfidenceInterval",
    "MULTIPLIER",
    "SCHEMES",
    "STATIONARY_DMC",
    "STATIONARY_MODIFIED",
    "SimultaneousBand",
    "block_indices",
    "bootstrap_extremogram",
    "bootstrap_quantiles",
    "ci_direct",
    "ci_transfer",
    "dmc_replicates",
    "draw_blocks",
    "modified_replicates",
    "multiplier_bootstrap_extremogram",
    "multiplier_replicates",
    "read_replicates_csv",
    "simultaneous_band",
    "stationary_bootstrap_dmc",
    "stationary_bootstrap_modified",
    "stationary_indices",
    "wrap_index",
    "write_replicates_csv",
]

logger = logging.getLogger(__name__)

MULTIPLIER = "multiplier"
STATIONARY_DMC = "stationary_dmc"
STATIONARY_MODIFIED = "stationary_modified"
SCHEMES = (MULTIPLIER, STATIONARY_DMC, STATIONARY_MODIFIED)


def _ceil_index(q: float, count: int) -> int:
    # ceil(q * count) as a 1-based rank in 1..count; rounding guards 0.975*200 = 195.00000000000003
    return min(count, max(1, math.ceil(round(q * count, 9))))


def _safe_ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(den != 0, num / np.where(den != 0, den, 1), np.nan)


# multiplier block bootstrap ----------------------------------------------------


def _block_counts(series, a, pair, h_max, r_n):
    series = as_series(series)
    n = series.effective_length(h_max)
    scheme = BlockScheme(n, int(r_n))
    vals = series.values
    in_a = pair.in_A(vals, a)
    in_b = pair.in_B(vals, a)
    marginal = scheme.block_sums(in_a[:n].astype(np.int64))
    joint = np.stack(
        [scheme.block_sums((in_a[:n] & in_b[h : h + n]).astype(np.int64)) for h in range(h_max + 1)], axis=1
    )
    return scheme, marginal, joint


def multiplier_replicates(
    series: SeriesLike, a: float, pair: OrthantSetPair, h_max: int, r_n: int, xi: np.ndarray
) -> np.ndarray:
    """
    Multiplier replicates for a ``(B, m)`` matrix of multipliers.

    Returns a ``(B, h_max + 1)`` array, NaN where the weighted denominator
    vanishes.
    """
    scheme, marginal, joint = _block_counts(series, a, pair, h_max, r_n)
    xi = np.atleast_2d(np.asarray(xi, dtype=np.float64))
    if xi.shape[1] != scheme.block_count:
        raise ValueError(f"need {scheme.block_count} multipliers per replicate, got {xi.shape[1]}")
    w = 1.0 + xi
    num = (w[:, :, None] * joint[None, :, :]).sum(axis=1)
    den = (w * marginal[None, :]).sum(axis=1)
    return _safe_ratio(num, den[:, None])


def multiplier_bootstrap_extremogram(
    series: SeriesLike, a: float, pair: OrthantSetPair, h_max: int, r_n: int, xi: np.ndarray
) -> np.ndarray:
    """One multiplier replicate ``(rho*(0), ..., rho*(h_max))``."""
    xi = np.asarray(xi, dtype=np.float64)
    if xi.ndim != 1:
        raise ValueError("xi must be one-dimensional")
    return multiplier_replicates(series, a, pair, h_max, r_n, xi[None, :])[0]


# stationary bootstrap ------------------------------------------------------------


def wrap_index(t, n: int, rule: str = "modular"):
    """
    Map 1-based positions ``t`` (possibly beyond ``n``) into ``1..n``.

    ``"modular"`` maps ``t > n`` to ``(t mod (n - 1)) + 1``; ``"circular"``
    maps every ``t`` to ``((t - 1) mod n) + 1``.
    """
    t = np.asarray(t)
    if rule == "modular":
        if n < 2:
            raise ValueError("the modular wraparound rule needs n >= 2")
        return np.where(t > n, t % (n - 1) + 1, t)
    if rule == "circular":
        return (t - 1) % n + 1
    raise ValueError(f"unknown wraparound rule {rule!r}")


def draw_blocks(n: int, r: float, rng: Generator, size: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """
    Uniform 1-based start points and geometric block lengths (support 1, 2, ...,
    mean ``r``), enough columns that every row's lengths sum to at least ``n``.

    Returns ``(starts, lengths)`` of shape ``(size, c)``.
    """
    if not r >= 1:
        raise ValueError("mean block length must be at least 1")
    chunk = int(math.ceil(2 * n / r)) + 16
    starts, lengths = [], []
    total = np.zeros(size, dtype=np.int64)
    while True:
        starts.append(rng.integers(1, n + 1, size=(size, chunk)))
        lengths.append(rng.geometric(1.0 / r, size=(size, chunk)))
        total = total + lengths[-1].sum(axis=1)
        if np.all(total >= n):
            break
    return np.concatenate(starts, axis=1), np.concatenate(lengths, axis=1)


def block_indices(n: int, starts: np.ndarray, lengths: np.ndarray, wrap: str = "modular") -> np.ndarray:
    """
    0-based source indices of the glued resample of length ``n``.

    Position ``i`` in block ``j`` (``S_{j-1} < i <= S_j``) takes source index
    ``K_j - 1 + i - S_{j-1}``, wrapped; the last block is truncated at ``n``.
    Accepts one row (1-d ``starts``/``lengths``) or a batch of rows.
    """
    starts = np.atleast_2d(starts).astype(np.int64)
    lengths = np.atleast_2d(lengths).astype(np.int64)
    rows = starts.shape[0]
    ends = np.cumsum(lengths, axis=1)
    if np.any(ends[:, -1] < n):
        raise ValueError("block lengths do not cover the resample")
    prev = np.concatenate([np.zeros((rows, 1), dtype=np.int64), ends[:, :-1]], axis=1)
    marks = np.zeros((rows, n), dtype=np.int64)
    r_idx, c_idx = np.nonzero(prev < n)
    marks[r_idx, prev[r_idx, c_idx]] = 1
    block = np.cumsum(marks, axis=1) - 1
    pos = np.arange(1, n + 1)[None, :]
    row = np.arange(rows)[:, None]
    t = starts[row, block] - 1 + pos - prev[row, block]
    return wrap_index(t, n, wrap) - 1


def stationary_indices(n: int, r: float, rng: Generator, size: int = 1, wrap: str = "modular") -> np.ndarray:
    starts, lengths = draw_blocks(n, r, rng, size)
    return block_indices(n, starts, lengths, wrap)


def stationary_bootstrap_dmc(series: SeriesLike, r: float, rng: Generator, wrap: str = "modular"):
    """One stationary-bootstrap resample of the whole series (same length)."""
    series = as_series(series)
    idx = stationary_indices(series.length, r, rng, 1, wrap)[0]
    return type(series)(series.values[idx])


def dmc_replicates(
    series: SeriesLike, a: float, pair: OrthantSetPair, h_max: int, idx: np.ndarray
) -> np.ndarray:
    """
    Extremogram of each resample ``X[idx[b]]`` with the modified denominator.

    ``idx`` has shape ``(B, n_total)``.
    """
    series = as_series(series)
    n = series.effective_length(h_max)
    in_a = pair.in_A(series.values, a)[idx]
    in_b = pair.in_B(series.values, a)[idx]
    den = in_a[:, :n].sum(axis=1)
    num = np.stack([(in_a[:, :n] & in_b[:, h : h + n]).sum(axis=1) for h in range(h_max + 1)], axis=1)
    return _safe_ratio(num, den[:, None])


def modified_replicates(
    series: SeriesLike, a: float, pair: OrthantSetPair, h_max: int, idx: np.ndarray
) -> np.ndarray:
    """
    Modified stationary replicates from bivariate resampling indices.

    ``idx`` has shape ``(B, n)`` with ``n = n_total - h_max``; index ``t``
    selects the pair ``(X_t, X_{t+h})`` at every lag.
    """
    series = as_series(series)
    n = series.effective_length(h_max)
    idx = np.atleast_2d(idx)
    if idx.shape[1] != n:
        raise ValueError(f"need {n} resampling indices per replicate, got {idx.shape[1]}")
    in_a = pair.in_A(series.values, a)
    in_b = pair.in_B(series.values, a)
    marginal = in_a[:n].astype(np.int64)
    joint = np.stack([(in_a[:n] & in_b[h : h + n]) for h in range(h_max + 1)], axis=1).astype(np.int64)
    rows = idx.shape[0]
    mult = np.bincount((idx + n * np.arange(rows)[:, None]).ravel(), minlength=rows * n).reshape(rows, n)
    return _safe_ratio(mult @ joint, (mult @ marginal)[:, None])


def stationary_bootstrap_modified(
    series: SeriesLike,
    h: int,
    r: float,
    rng: Generator,
    a: float,
    pair: OrthantSetPair = DEFAULT_PAIR,
    n: int | None = None,
    wrap: str = "modular",
) -> float:
    """One modified stationary replicate at lag ``h`` (NaN when undefined)."""
    series = as_series(series)
    n = series.length - h if n is None else int(n)
    if n < 2 or n + h > series.length:
        raise ValueError(f"series of length {series.length} is too short for n={n}, h={h}")
    trimmed = type(series)(series.values[: n + h])
    idx = stationary_indices(n, r, rng, 1, wrap)
    return float(modified_replicates(trimmed, a, pair, h, idx)[0, h])


# quantiles, intervals, bands ------------------------------------------------------


def bootstrap_quantiles(replicates, alpha: float) -> tuple[float, float, int]:
    """
    Lower and upper empirical ``alpha / 2`` quantiles of the defined replicates.

    Returns
    -------
    (l_b, u_b, undefined) : tuple
        The ``ceil(alpha/2 * B)``-th and ``ceil((1 - alpha/2) * B)``-th order
        statistics over the ``B`` defined replicates, and the number of
        undefined (NaN) replicates that were dropped.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    x = np.asarray(replicates, dtype=np.float64)
    ok = ~np.isnan(x)
    defined = np.sort(x[ok], kind="stable")
    if defined.size == 0:
        raise NoIntervalError("all bootstrap replicates are undefined")
    undefined = int(x.size - defined.size)
    if undefined:
        logger.debug("dropped %d undefined replicates", undefined)
    lo = defined[_ceil_index(alpha / 2, defined.size) - 1]
    hi = defined[_ceil_index(1 - alpha / 2, defined.size) - 1]
    return float(lo), float(hi), undefined


@dataclass(frozen=True)
class ConfidenceInterval:
    """
    Pointwise interval ``[lower, upper]`` inside [0, 1].

    ``lower`` and ``upper`` are NaN when the base estimate is undefined.
    """

    lower: float
    upper: float
    level: float
    method: str = "direct"
    p1: float | None = None
    p2: float | None = None

    @property
    def defined(self) -> bool:
        return not (math.isnan(self.lower) or math.isnan(self.upper))

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def covers(self, value: float) -> bool:
        return self.defined and self.lower <= value <= self.upper


def _reflect(base, base_ref, l_b, u_b, c):
    lower = min(max(base - c * (u_b - base_ref), 0.0), 1.0)
    upper = max(min(base - c * (l_b - base_ref), 1.0), 0.0)
    return lower, upper


def ci_direct(base: float, l_b: float, u_b: float, level: float = 0.95) -> ConfidenceInterval:
    """``[2 base - u_b, 2 base - l_b]`` intersected with [0, 1]."""
    if l_b > u_b:
        raise ValueError("need l_b <= u_b")
    if math.isnan(base):
        return ConfidenceInterval(math.nan, math.nan, level, "direct")
    lower, upper = _reflect(base, base, l_b, u_b, 1.0)
    return ConfidenceInterval(lower, upper, level, "direct")


def ci_transfer(
    base_p1: float, base_p2: float, l_b: float, u_b: float, p1: float, p2: float, level: float = 0.95
) -> ConfidenceInterval:
    """
    Interval at exceedance probability ``p1`` from bootstrap quantiles at ``p2``.

    The ``p2`` bootstrap error is rescaled by ``sqrt(p2 / p1)``:
    ``[base_p1 - c (u_b - base_p2), base_p1 - c (l_b - base_p2)]`` intersected
    with [0, 1].
    """
    if not 0 < p1 <= p2 < 1:
        raise ValueError("need 0 < p1 <= p2 < 1")
    if l_b > u_b:
        raise ValueError("need l_b <= u_b")
    if math.isnan(base_p1) or math.isnan(base_p2):
        return ConfidenceInterval(math.nan, math.nan, level, "transfer", p1, p2)
    lower, upper = _reflect(base_p1, base_p2, l_b, u_b, math.sqrt(p2 / p1))
    return ConfidenceInterval(lower, upper, level, "transfer", p1, p2)


@dataclass(frozen=True)
class SimultaneousBand:
    """
    Sup-norm band: ``|rho(h) - rho_hat(h)| <= radius`` for every lag in ``lags``.

    ``level`` is the bootstrap mass required inside the band.
    """

    radius: float
    level: float
    lags: tuple[int, ...]
    rows_used: int

    def contains(self, base: np.ndarray, values: np.ndarray) -> bool:
        lags = list(self.lags)
        return bool(np.max(np.abs(np.asarray(values)[lags] - np.asarray(base)[lags])) <= self.radius)


def simultaneous_band(replicates, base, level: float = 0.95, lags=None) -> SimultaneousBand:
    """
    Smallest radius whose sup-norm ball holds at least ``level`` of the rows.

    Parameters
    ----------
    replicates : BootstrapReplicates or ndarray
        ``(B, h_max + 1)`` replicate matrix.
    base : ExtremogramEstimate or ndarray
        Estimate the replicates are centred at.
    level : float
        Required fraction in ``(0, 1]``.
    lags : sequence of int, optional
        Lags forming the sup-norm grid; all lags by default.
    """
    if not 0 < level <= 1:
        raise ValueError("level must lie in (0, 1]")
    values = replicates.values if isinstance(replicates, BootstrapReplicates) else np.asarray(replicates, float)
    base = base.values if isinstance(base, ExtremogramEstimate) else np.asarray(base, float)
    values = np.atleast_2d(values)
    lags = tuple(range(values.shape[1])) if lags is None else tuple(int(h) for h in lags)
    dev = np.abs(values[:, lags] - base[None, list(lags)])
    ok = ~np.any(np.isnan(dev), axis=1)
    if not np.any(ok):
        raise NoBandError("no replicate row is defined at every lag of the grid")
    sup = np.sort(dev[ok].max(axis=1), kind="stable")
    radius = float(sup[_ceil_index(level, sup.size) - 1])
    return SimultaneousBand(radius, level, lags, int(sup.size))


# replicate sets ---------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BootstrapReplicates:
    """``(B, h_max + 1)`` replicate matrix with the scheme and seed that produced it."""

    values: np.ndarray
    scheme: str
    base: ExtremogramEstimate
    seed: int | None = None

    @property
    def count(self) -> int:
        return self.values.shape[0]

    def quantiles(self, alpha: float) -> list[tuple[float, float, int]]:
        return [bootstrap_quantiles(self.values[:, h], alpha) for h in range(self.values.shape[1])]


def bootstrap_extremogram(
    series: SeriesLike,
    threshold: float | ThresholdSpec,
    scheme: str,
    B: int,
    r: float,
    seed: int,
    pair: OrthantSetPair = DEFAULT_PAIR,
    h_max: int = 10,
    multiplier: str = "student_t",
    wrap: str = "modular",
) -> BootstrapReplicates:
    """
    Draw ``B`` replicates of one scheme.

    The threshold (fixed, or estimated once from the first ``n``
    observations) is held fixed across replicates.  Replicate ``b`` uses
    stream ``(seed, 3, scheme index, b)``.
    """
    series = as_series(series)
    n = series.effective_length(h_max)
    a = threshold if isinstance(threshold, (int, float)) else estimate_threshold(series, threshold, n=n)
    base = empirical_extremogram(series, a, pair, h_max)
    if not isinstance(threshold, (int, float)):
        base = ExtremogramEstimate(base.values, base.marginal_count, base.joint_counts, a, threshold, base.n)
    if scheme not in SCHEMES:
        raise ValueError(f"unknown bootstrap scheme {scheme!r}")
    if B < 1:
        raise ValueError("need at least one replicate")
    sid = SCHEMES.index(scheme)
    streams = [rngmod.stream(seed, rngmod.REPLICATE, sid, b) for b in range(B)]
    if scheme == MULTIPLIER:
        m = BlockScheme(n, int(r)).block_count
        xi = np.stack([sample_multipliers(m, g, multiplier) for g in streams])
        values = multiplier_replicates(series, a, pair, h_max, int(r), xi)
    elif scheme == STATIONARY_DMC:
        idx = np.concatenate([stationary_indices(series.length, r, g, 1, wrap) for g in streams])
        values = dmc_replicates(series, a, pair, h_max, idx)
    else:
        idx = np.concatenate([stationary_indices(n, r, g, 1, wrap) for g in streams])
        values = modified_replicates(series, a, pair, h_max, idx)
    return BootstrapReplicates(values, scheme, base, seed)


def write_replicates_csv(replicates: BootstrapReplicates | np.ndarray, path: str | os.PathLike) -> None:
    """Rows are replicates, columns lags ``h0, h1, ...``; undefined cells are ``NA``."""
    values = replicates.values if isinstance(replicates, BootstrapReplicates) else np.asarray(replicates)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"h{h}" for h in range(values.shape[1])])
        for row in values:
            writer.writerow(["NA" if math.isnan(v) else repr(float(v)) for v in row])


def read_replicates_csv(path: str | os.PathLike) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        rows = [[math.nan if v == "NA" else float(v) for v in row] for row in reader]
    return np.array(rows, dtype=np.float64, ndmin=2)

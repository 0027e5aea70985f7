"""
Extremogram point estimates and reference values.

The empirical estimator at lag ``h`` is

    rho_hat(h) = sum_{i=1}^n 1{X_i/a in A, X_{i+h}/a in B} / sum_{i=1}^n 1{X_i/a in A}

with both sums over the same ``n = n_total - h_max`` indices.  An estimate
whose denominator is zero is undefined and carried as NaN, never as 0.
"""
from __future__ import annotations

import hashlib
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import rng as rngmod
from .core import (
    EmpiricalQuantile,
    Fixed,
    OrderStatistic,
    OrthantSetPair,
    SeriesLike,
    ThresholdSpec,
    as_series,
    estimate_threshold,
)
from .errors import MissingOracleError
from .models import ModelSpec, linear_coefficients, simulate

__all__ = [
    "ExtremogramEstimate",
    "PreasymptoticOracle",
    "analytic_extremogram",
    "cached_oracle",
    "empirical_extremogram",
    "empirical_extremogram_estimated",
    "lag_counts",
    "linear_process_extremogram",
    "load_oracle",
    "oracle_key",
    "oracle_path",
    "preasymptotic_extremogram",
    "preasymptotic_extremograms",
    "save_oracle",
    "threshold_key",
]

logger = logging.getLogger(__name__)

DEFAULT_PAIR = OrthantSetPair()
CACHE_ENV = "EXTREMOBOOT_CACHE"


@dataclass(frozen=True, eq=False)
class ExtremogramEstimate:
    """
    Per-lag estimates for ``h = 0..h_max``.

    Attributes
    ----------
    values : ndarray
        Estimates, NaN where undefined.
    marginal_count : int
        Number of ``i`` with ``X_i / a`` in ``A``.
    joint_counts : ndarray of int
        Joint exceedance counts per lag.
    threshold : float
        Normalizing threshold ``a`` actually used.
    threshold_spec : ThresholdSpec or None
        How ``threshold`` was obtained; ``None`` when supplied directly.
    n : int
        Number of summands.
    """

    values: np.ndarray
    marginal_count: int
    joint_counts: np.ndarray
    threshold: float
    threshold_spec: ThresholdSpec | None = None
    n: int = 0

    @property
    def h_max(self) -> int:
        return self.values.size - 1

    @property
    def defined(self) -> np.ndarray:
        return ~np.isnan(self.values)


def lag_counts(
    values: np.ndarray, a: float, pair: OrthantSetPair, h_max: int, n: int, numerator_n=None
) -> tuple[int, np.ndarray]:
    """
    Marginal count over ``i < n`` and joint counts per lag.

    ``numerator_n(h)`` optionally overrides the number of joint summands.
    """
    in_a = pair.in_A(values, a)
    in_b = in_a if _same_sets(pair) else pair.in_B(values, a)
    marginal = int(np.count_nonzero(in_a[:n]))
    joint = np.empty(h_max + 1, dtype=np.int64)
    for h in range(h_max + 1):
        m = n if numerator_n is None else numerator_n(h)
        joint[h] = np.count_nonzero(in_a[:m] & in_b[h : h + m])
    return marginal, joint


def _same_sets(pair: OrthantSetPair) -> bool:
    return np.array_equal(pair.lower_A, pair.lower_B)


def _ratio(joint: np.ndarray, marginal) -> np.ndarray:
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(np.asarray(marginal) > 0, joint / np.asarray(marginal, dtype=np.float64), np.nan)


def empirical_extremogram(
    series: SeriesLike,
    a: float,
    pair: OrthantSetPair = DEFAULT_PAIR,
    h_max: int = 10,
    n: int | None = None,
    denominator: str = "modified",
) -> ExtremogramEstimate:
    """
    Empirical extremogram at fixed threshold ``a``.

    Parameters
    ----------
    series : TimeSeries or array_like
        Observations ``X_1..X_{n + h_max}``.
    a : float
        Positive normalizing threshold.
    pair : OrthantSetPair
    h_max : int
    n : int, optional
        Number of summands; defaults to ``len(series) - h_max``.
    denominator : {"modified", "full"}
        ``"modified"`` sums numerator and denominator over the same ``n``
        indices.  ``"full"`` uses all observations in the
        denominator and the ``n_total - h`` available pairs in the numerator.
    """
    if not a > 0:
        raise ValueError(f"threshold must be positive, got {a}")
    series = as_series(series)
    total = series.length
    if denominator == "modified":
        n = series.effective_length(h_max) if n is None else int(n)
        if n < 1 or n + h_max > total:
            raise ValueError(f"series of length {total} is too short for n={n}, h_max={h_max}")
        marginal, joint = lag_counts(series.values, a, pair, h_max, n)
    elif denominator == "full":
        if h_max >= total:
            raise ValueError("h_max must be smaller than the series length")
        n = total
        marginal, joint = lag_counts(series.values, a, pair, h_max, n, numerator_n=lambda h: total - h)
    else:
        raise ValueError(f"unknown denominator convention {denominator!r}")
    return ExtremogramEstimate(_ratio(joint, marginal), marginal, joint, float(a), None, n)


def empirical_extremogram_estimated(
    series: SeriesLike,
    spec: ThresholdSpec,
    pair: OrthantSetPair = DEFAULT_PAIR,
    h_max: int = 10,
    denominator: str = "modified",
) -> ExtremogramEstimate:
    """Empirical extremogram with the threshold estimated from the first ``n`` observations."""
    series = as_series(series)
    n = series.effective_length(h_max)
    a = estimate_threshold(series, spec, n=n)
    est = empirical_extremogram(series, a, pair, h_max, denominator=denominator)
    return ExtremogramEstimate(est.values, est.marginal_count, est.joint_counts, a, spec, est.n)


def linear_process_extremogram(coefficients, alpha: float, h_max: int) -> np.ndarray:
    """
    Limit extremogram for ``A = B = (1, inf)`` of a linear process.

    ``rho(h) = sum_j min(psi_j, psi_{j+h})^alpha / sum_j psi_j^alpha`` for
    non-negative coefficients and symmetric regularly varying innovations
    with tail index ``alpha``.
    """
    psi = np.asarray(coefficients, dtype=np.float64)
    if psi.ndim != 1 or psi.size == 0:
        raise ValueError("coefficients must be a non-empty sequence")
    if np.any(psi < 0):
        raise ValueError("only non-negative coefficients are supported")
    if not np.any(psi > 0):
        raise ValueError("at least one coefficient must be positive")
    if not alpha > 0:
        raise ValueError("tail index must be positive")
    psi = psi / psi.max()  # the ratio is scale-free; avoids underflow of psi**alpha
    total = (psi**alpha).sum()
    out = np.zeros(h_max + 1)
    for h in range(min(h_max, psi.size - 1) + 1):
        out[h] = (np.minimum(psi[: psi.size - h], psi[h:]) ** alpha).sum() / total
    return out


def analytic_extremogram(model: ModelSpec, h_max: int) -> np.ndarray:
    """Limit extremogram of an AR(1) or MA model with symmetrized Frechet noise."""
    psi, alpha = linear_coefficients(model)
    return linear_process_extremogram(psi, alpha, h_max)


# pre-asymptotic oracle --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PreasymptoticOracle:
    """
    Simulated ``P(X_h / a in B | X_0 / a in A)`` at a model threshold.

    ``values`` pools counts over all series (ratio of totals);
    ``mean_of_ratios`` averages per-series ratios over series with at least
    one marginal exceedance.  ``std_errors`` are delta-method standard
    errors from the between-series variation of the counts.
    """

    values: np.ndarray
    std_errors: np.ndarray
    mean_of_ratios: np.ndarray
    joint_totals: np.ndarray
    marginal_total: int
    threshold: float
    series_count: int
    series_length: int
    key: str = ""
    diagnostics: str = ""

    @property
    def h_max(self) -> int:
        return self.values.size - 1


def threshold_key(spec: ThresholdSpec) -> str:
    if isinstance(spec, EmpiricalQuantile):
        return f"quantile(p={spec.p!r})"
    if isinstance(spec, OrderStatistic):
        return f"order_statistic(k={spec.k!r})"
    if isinstance(spec, Fixed):
        return f"fixed(a={spec.a!r})"
    raise TypeError(f"unknown threshold spec {spec!r}")


def _pair_key(pair: OrthantSetPair) -> str:
    return f"orthants(A={pair.lower_A.tolist()!r},B={pair.lower_B.tolist()!r},scale={pair.scale!r})"


def oracle_key(
    model: ModelSpec,
    spec: ThresholdSpec,
    h_max: int,
    series_count: int,
    series_length: int,
    seed: int,
    pair: OrthantSetPair = DEFAULT_PAIR,
) -> str:
    return "|".join(
        [
            model.key,
            threshold_key(spec),
            _pair_key(pair),
            f"h_max={h_max}",
            f"series_count={series_count}",
            f"series_length={series_length}",
            f"seed={seed}",
        ]
    )


def default_cache_dir() -> Path:
    return Path(os.environ.get(CACHE_ENV, Path.home() / ".cache" / "extremoboot"))


def oracle_path(key: str, cache_dir: str | os.PathLike | None = None) -> Path:
    root = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    return root / f"oracle-{hashlib.sha256(key.encode()).hexdigest()[:20]}.txt"


_HEADER = "# extremoboot pre-asymptotic extremogram oracle, format 1"
_COLUMNS = "lag,rho,std_error,mean_of_ratios,joint_total"


def save_oracle(oracle: PreasymptoticOracle, path: str | os.PathLike) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [
        _HEADER,
        f"key: {oracle.key}",
        f"threshold: {oracle.threshold!r}",
        f"series_count: {oracle.series_count}",
        f"series_length: {oracle.series_length}",
        f"marginal_total: {oracle.marginal_total}",
        f"diagnostics: {oracle.diagnostics}",
        _COLUMNS,
    ]
    for h in range(oracle.h_max + 1):
        lines.append(
            f"{h},{float(oracle.values[h])!r},{float(oracle.std_errors[h])!r},"
            f"{float(oracle.mean_of_ratios[h])!r},{int(oracle.joint_totals[h])}"
        )
    tmp = path.with_suffix(".tmp")
    tmp.write_text("\n".join(lines) + "\n")
    tmp.replace(path)


def load_oracle(path: str | os.PathLike) -> PreasymptoticOracle:
    text = Path(path).read_text().splitlines()
    if not text or text[0] != _HEADER:
        raise ValueError(f"{path}: not an oracle cache file")
    meta = {}
    i = 1
    while text[i] != _COLUMNS:
        name, _, value = text[i].partition(": ")
        meta[name] = value
        i += 1
    rows = np.array([[float(v) for v in line.split(",")] for line in text[i + 1 :] if line], ndmin=2)
    return PreasymptoticOracle(
        values=rows[:, 1],
        std_errors=rows[:, 2],
        mean_of_ratios=rows[:, 3],
        joint_totals=rows[:, 4].astype(np.int64),
        marginal_total=int(meta["marginal_total"]),
        threshold=float(meta["threshold"]),
        series_count=int(meta["series_count"]),
        series_length=int(meta["series_length"]),
        key=meta["key"],
        diagnostics=meta.get("diagnostics", ""),
    )


def _oracle_series(model, length, seed, index):
    return simulate(model, length, rngmod.stream(seed, rngmod.ORACLE, index))


def _summarize(marg, joint, a, series_count, series_length, key) -> PreasymptoticOracle:
    h_max = joint.shape[1] - 1
    m_tot = int(marg.sum())
    j_tot = joint.sum(axis=0)
    diagnostics = ""
    if m_tot == 0:
        values = np.full(h_max + 1, np.nan)
        se = np.full(h_max + 1, np.nan)
        diagnostics = f"no marginal exceedances of threshold {a!r} in {series_count} x {series_length} observations"
        logger.warning(diagnostics)
    else:
        values = j_tot / m_tot
        if series_count > 1:
            resid = joint - values[None, :] * marg[:, None]
            se = np.sqrt((resid**2).sum(axis=0) / (series_count * (series_count - 1))) / marg.mean()
        else:
            se = np.full(h_max + 1, np.nan)
            diagnostics = "single series: standard errors unavailable"
    per_series = _ratio(joint, marg[:, None])
    if np.any(marg > 0):
        mean_of_ratios = np.nanmean(per_series, axis=0)
    else:
        mean_of_ratios = np.full(h_max + 1, np.nan)
    return PreasymptoticOracle(
        values=np.asarray(values, dtype=np.float64),
        std_errors=np.asarray(se, dtype=np.float64),
        mean_of_ratios=np.asarray(mean_of_ratios, dtype=np.float64),
        joint_totals=j_tot,
        marginal_total=m_tot,
        threshold=a,
        series_count=series_count,
        series_length=series_length,
        key=key,
        diagnostics=diagnostics,
    )


def preasymptotic_extremograms(
    model: ModelSpec,
    specs,
    h_max: int,
    series_count: int,
    series_length: int,
    seed: int,
    pair: OrthantSetPair = DEFAULT_PAIR,
    workers: int = 1,
    cache_dir: str | os.PathLike | None = None,
    use_cache: bool = True,
) -> list[PreasymptoticOracle]:
    """
    Monte Carlo pre-asymptotic extremograms for several threshold specs.

    For an estimated threshold spec the model threshold is the average of
    the per-series estimates (first pass); counts are then accumulated at
    that common threshold over the same series (second pass, streams
    re-derived from ``(seed, series index)``).  All specs share the same
    simulated series.  Results are combined in series order, so they do not
    depend on ``workers``.

    With ``use_cache`` each result is read from / written to
    ``oracle_path(key, cache_dir)``.
    """
    if series_count < 1 or series_length <= h_max:
        raise ValueError("oracle budget must have series_count >= 1 and series_length > h_max")
    specs = list(specs)
    keys = [oracle_key(model, s, h_max, series_count, series_length, seed, pair) for s in specs]
    found: dict[int, PreasymptoticOracle] = {}
    if use_cache:
        for i, key in enumerate(keys):
            path = oracle_path(key, cache_dir)
            if path.exists():
                cached = load_oracle(path)
                if cached.key == key:
                    found[i] = cached
    todo = [i for i in range(len(specs)) if i not in found]
    if not todo:
        return [found[i] for i in range(len(specs))]

    n = series_length - h_max
    indices = range(series_count)

    def run(fn):
        if workers > 1:
            with ThreadPoolExecutor(workers) as pool:
                return list(pool.map(fn, indices))
        return [fn(i) for i in indices]

    estimated = [i for i in todo if not isinstance(specs[i], Fixed)]
    thresholds = {i: float(specs[i].a) for i in todo if isinstance(specs[i], Fixed)}
    if estimated:
        def first_pass(k):
            x = _oracle_series(model, series_length, seed, k)
            return [estimate_threshold(x, specs[i], n=n) for i in estimated]

        per_series = np.array(run(first_pass))
        for col, i in enumerate(estimated):
            thresholds[i] = float(per_series[:, col].mean())

    def second_pass(k):
        x = _oracle_series(model, series_length, seed, k).values
        return [lag_counts(x, thresholds[i], pair, h_max, n) for i in todo]

    results = run(second_pass)
    for col, i in enumerate(todo):
        marg = np.array([res[col][0] for res in results], dtype=np.int64)
        joint = np.array([res[col][1] for res in results], dtype=np.int64).reshape(series_count, h_max + 1)
        oracle = _summarize(marg, joint, thresholds[i], series_count, series_length, keys[i])
        if use_cache:
            save_oracle(oracle, oracle_path(keys[i], cache_dir))
        found[i] = oracle
    return [found[i] for i in range(len(specs))]


def preasymptotic_extremogram(
    model: ModelSpec,
    spec: ThresholdSpec,
    h_max: int,
    series_count: int,
    series_length: int,
    seed: int,
    pair: OrthantSetPair = DEFAULT_PAIR,
    workers: int = 1,
    cache_dir: str | os.PathLike | None = None,
    use_cache: bool = True,
) -> PreasymptoticOracle:
    """Single-spec form of :func:`preasymptotic_extremograms`."""
    return preasymptotic_extremograms(
        model, [spec], h_max, series_count, series_length, seed, pair, workers, cache_dir, use_cache
    )[0]


def cached_oracle(
    model: ModelSpec,
    spec: ThresholdSpec,
    h_max: int,
    series_count: int,
    series_length: int,
    seed: int,
    pair: OrthantSetPair = DEFAULT_PAIR,
    cache_dir: str | os.PathLike | None = None,
) -> PreasymptoticOracle:
    """Load a previously built oracle; raise :class:`MissingOracleError` if absent."""
    key = oracle_key(model, spec, h_max, series_count, series_length, seed, pair)
    path = oracle_path(key, cache_dir)
    if not path.exists():
        raise MissingOracleError(key, path)
    oracle = load_oracle(path)
    if oracle.key != key:
        raise MissingOracleError(key, path)
    return oracle

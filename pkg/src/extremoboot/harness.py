"""
Monte Carlo coverage experiments for bootstrap extremogram intervals.

Each repetition simulates one series, estimates thresholds at every needed
exceedance probability, draws ``B`` replicates per scheme and scores the
resulting intervals against a reference extremogram.  Repetition ``rep``
draws its series from stream ``(seed, 0, rep)`` and the replicates of
scheme ``s`` from ``(seed, 1, rep, s)``; repetitions are independent and
their results are combined in index order, so a table depends only on the
configuration and seed, not on the number of worker threads.

Config files are flat ``key = value`` text; see :data:`CONFIG_KEYS`.
"""
from __future__ import annotations

import csv
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import rng as rngmod
from .bootstrap import (
    MULTIPLIER,
    SCHEMES,
    STATIONARY_DMC,
    bootstrap_quantiles,
    ci_direct,
    ci_transfer,
    dmc_replicates,
    modified_replicates,
    multiplier_replicates,
    stationary_indices,
)
from .core import BlockScheme, EmpiricalQuantile, estimate_threshold
from .errors import ConfigError, NoIntervalError
from .extremogram import (
    DEFAULT_PAIR,
    analytic_extremogram,
    cached_oracle,
    empirical_extremogram,
    preasymptotic_extremograms,
)
from .models import (
    Ar1,
    Garch,
    Ma,
    ModelSpec,
    StandardNormal,
    StudentT,
    SymmetrizedFrechet,
    sample_multipliers,
    simulate,
)

__all__ = [
    "CONFIG_KEYS",
    "CoverageCell",
    "CoverageTable",
    "ExperimentConfig",
    "Transfer",
    "build_oracles",
    "check_config",
    "emit_report",
    "load_config",
    "parse_config",
    "read_coverage_csv",
    "run_coverage_experiment",
]

DIRECT = "direct"


@dataclass(frozen=True)
class Transfer:
    """Interval at exceedance probability ``p1`` from the bootstrap at ``p2``."""

    p1: float
    p2: float

    def __post_init__(self):
        if not 0 < self.p1 <= self.p2 < 1:
            raise ValueError("transfer needs 0 < p1 <= p2 < 1")

    def __str__(self):
        return f"transfer:{self.p1!r}:{self.p2!r}"


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelSpec = Garch(1e-4, 0.08, 0.9)
    n: int = 2000
    sim_count: int = 500
    B: int = 200
    block_length: int = 100
    thresholds: tuple[float, ...] = (0.01, 0.025, 0.05)
    h_max: int = 10
    schemes: tuple[str, ...] = SCHEMES
    ci_methods: tuple = (DIRECT,)
    level: float = 0.95
    truth: str = "oracle"
    seed: int = 0
    multiplier: str = "student_t"
    wrap: str = "modular"
    oracle_series_count: int = 100
    oracle_series_length: int = 1_000_000
    oracle_seed: int = 12345

    def __post_init__(self):
        if self.sim_count < 1:
            raise ConfigError("sim_count", "must be >= 1")
        if self.B < 2:
            raise ConfigError("B", "must be >= 2")
        if not 0 < self.level < 1:
            raise ConfigError("level", "nominal level must lie in (0, 1)")
        if self.n < 2:
            raise ConfigError("n", "must be >= 2")
        if self.h_max < 1:
            raise ConfigError("h_max", "must be >= 1")
        if not 1 <= self.block_length <= self.n:
            raise ConfigError("block_length", f"must lie in 1..n={self.n}")
        for p in self.thresholds:
            if not 0 < p < 1:
                raise ConfigError("thresholds", f"{p} is not in (0, 1)")
        for s in self.schemes:
            if s not in SCHEMES:
                raise ConfigError("schemes", f"unknown scheme {s!r}")
        for m in self.ci_methods:
            if m != DIRECT and not isinstance(m, Transfer):
                raise ConfigError("ci_methods", f"unknown method {m!r}")
        if self.truth not in ("oracle", "analytic"):
            raise ConfigError("truth", "must be 'oracle' or 'analytic'")
        if self.multiplier not in ("student_t", "normal"):
            raise ConfigError("multiplier", "must be 'student_t' or 'normal'")
        if self.wrap not in ("modular", "circular"):
            raise ConfigError("wrap", "must be 'modular' or 'circular'")

    @property
    def alpha(self) -> float:
        return 1.0 - self.level

    def needed_thresholds(self) -> tuple[float, ...]:
        """Every exceedance probability at which bases or replicates are needed."""
        ps = set(self.thresholds)
        for m in self.ci_methods:
            if isinstance(m, Transfer):
                ps.update((m.p1, m.p2))
        return tuple(sorted(ps))

    def truth_thresholds(self) -> tuple[float, ...]:
        ps = set(self.thresholds)
        ps.update(m.p1 for m in self.ci_methods if isinstance(m, Transfer))
        return tuple(sorted(ps))


def check_config(config: ExperimentConfig) -> list[str]:
    """
    Advisory warnings for block lengths that are large relative to the
    expected number of exceedances; never raised as errors.
    """
    msgs = []
    for p in config.needed_thresholds():
        limit = config.n * math.sqrt(p) / 2
        if config.block_length > limit:
            msgs.append(
                f"block length {config.block_length} exceeds n*sqrt(p)/2 = {limit:.1f} at p={p}; "
                "blocks may be too long for the number of exceedances"
            )
    if isinstance(config.model, Garch) and config.model.alpha1 + config.model.beta1 >= 1:
        msgs.append("GARCH alpha1 + beta1 >= 1")
    for m in msgs:
        warnings.warn(m, stacklevel=2)
    return msgs


# config files ------------------------------------------------------------------------

CONFIG_KEYS = {
    "model": "garch | ar1 | ma",
    "alpha0": "GARCH constant (default 1e-4)",
    "alpha1": "GARCH ARCH coefficient (default 0.08)",
    "beta1": "GARCH GARCH coefficient (default 0.9)",
    "phi": "AR(1) coefficient (default 0.8)",
    "coefficients": "MA coefficients psi_0, psi_1, ... (default 1, 0.5, 0.8)",
    "innovation": "student_t | frechet | normal (default student_t for garch, frechet otherwise)",
    "innovation_df": "Student-t degrees of freedom (default 8)",
    "innovation_scale": "unit_variance | unit_scale for Student-t innovations (default unit_variance)",
    "innovation_alpha": "symmetrized Frechet tail index (default 3)",
    "burn_in": "discarded initial steps (default 2000 garch, 1000 ar1, 0 ma)",
    "n": "number of summands per simulated series (series length is n + h_max)",
    "sim_count": "Monte Carlo repetitions",
    "B": "bootstrap replicates per repetition and scheme",
    "block_length": "block length r (mean block length for stationary schemes)",
    "thresholds": "exceedance probabilities p, comma separated",
    "h_max": "largest lag",
    "schemes": "multiplier, stationary_dmc, stationary_modified (comma separated)",
    "ci_methods": "direct and/or transfer:p1:p2 (comma separated)",
    "level": "nominal coverage 1 - alpha",
    "truth": "oracle | analytic",
    "seed": "root seed",
    "multiplier": "student_t | normal",
    "wrap": "modular | circular",
    "oracle_series_count": "series simulated for the pre-asymptotic reference",
    "oracle_series_length": "length of each reference series",
    "oracle_seed": "root seed of the reference simulation",
}

_INT_KEYS = {"n", "sim_count", "B", "block_length", "h_max", "seed", "oracle_series_count",
             "oracle_series_length", "oracle_seed", "burn_in"}
_FLOAT_KEYS = {"alpha0", "alpha1", "beta1", "phi", "innovation_df", "innovation_alpha", "level"}


def _as_int(key, value):
    try:
        f = float(value)
    except ValueError:
        raise ConfigError(key, f"expected an integer, got {value!r}") from None
    if not f.is_integer():
        raise ConfigError(key, f"expected an integer, got {value!r}")
    return int(f)


def _as_float(key, value):
    try:
        return float(value)
    except ValueError:
        raise ConfigError(key, f"expected a number, got {value!r}") from None


def _as_list(value):
    return [v.strip() for v in value.split(",") if v.strip()]


def _ci_method(value):
    if value == DIRECT:
        return DIRECT
    parts = value.split(":")
    if len(parts) != 3 or parts[0] != "transfer":
        raise ConfigError("ci_methods", f"expected 'direct' or 'transfer:p1:p2', got {value!r}")
    try:
        return Transfer(float(parts[1]), float(parts[2]))
    except ValueError as exc:
        raise ConfigError("ci_methods", str(exc)) from None


def parse_config(text: str) -> ExperimentConfig:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(key or f"line {lineno}", f"line {lineno} is not 'key = value'")
        if key not in CONFIG_KEYS:
            raise ConfigError(key, "unknown key")
        if key in raw:
            raise ConfigError(key, "given more than once")
        raw[key] = value

    vals = {}
    for key, value in raw.items():
        if key in _INT_KEYS:
            vals[key] = _as_int(key, value)
        elif key in _FLOAT_KEYS:
            vals[key] = _as_float(key, value)
        else:
            vals[key] = value

    model = _model_from(vals)
    kwargs = {}
    for key in ("n", "sim_count", "B", "block_length", "h_max", "level", "truth", "seed", "multiplier", "wrap",
                "oracle_series_count", "oracle_series_length", "oracle_seed"):
        if key in vals:
            kwargs[key] = vals[key]
    if "thresholds" in vals:
        kwargs["thresholds"] = tuple(_as_float("thresholds", v) for v in _as_list(vals["thresholds"]))
    if "schemes" in vals:
        kwargs["schemes"] = tuple(_as_list(vals["schemes"]))
        if not kwargs["schemes"]:
            raise ConfigError("schemes", "at least one scheme is required")
    if "ci_methods" in vals:
        kwargs["ci_methods"] = tuple(_ci_method(v) for v in _as_list(vals["ci_methods"]))
    return ExperimentConfig(model=model, **kwargs)


def _model_from(vals) -> ModelSpec:
    kind = vals.get("model", "garch")
    inn_kind = vals.get("innovation", "student_t" if kind == "garch" else "frechet")
    if inn_kind == "student_t":
        scale = vals.get("innovation_scale", "unit_variance")
        if scale not in ("unit_variance", "unit_scale"):
            raise ConfigError("innovation_scale", "must be unit_variance or unit_scale")
        try:
            innovation = StudentT(vals.get("innovation_df", 8.0), scale == "unit_variance")
        except ValueError as exc:
            raise ConfigError("innovation_df", str(exc)) from None
    elif inn_kind == "frechet":
        try:
            innovation = SymmetrizedFrechet(vals.get("innovation_alpha", 3.0))
        except ValueError as exc:
            raise ConfigError("innovation_alpha", str(exc)) from None
    elif inn_kind == "normal":
        innovation = StandardNormal()
    else:
        raise ConfigError("innovation", f"unknown innovation {inn_kind!r}")
    extra = {"burn_in": vals["burn_in"]} if "burn_in" in vals else {}
    try:
        if kind == "garch":
            return Garch(vals.get("alpha0", 1e-4), vals.get("alpha1", 0.08), vals.get("beta1", 0.9), innovation, **extra)
        if kind == "ar1":
            return Ar1(vals.get("phi", 0.8), innovation, **extra)
        if kind == "ma":
            coef = tuple(_as_float("coefficients", c) for c in _as_list(vals.get("coefficients", "1, 0.5, 0.8")))
            return Ma(coef, innovation, **extra)
    except ValueError as exc:
        raise ConfigError("model", str(exc)) from None
    raise ConfigError("model", f"unknown model {kind!r}")


def load_config(path: str | os.PathLike) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


# coverage tables ----------------------------------------------------------------------


@dataclass(frozen=True)
class CoverageCell:
    """
    Coverage counts for one ``(scheme, method, p, h)``.

    ``covered + noncovered + undefined_base == sim_count``.  Repetitions
    whose replicates were all undefined count as non-covering and are also
    tallied in ``no_interval``.
    """

    scheme: str
    method: str
    p: float
    h: int
    sim_count: int
    covered: int = 0
    noncovered: int = 0
    undefined_base: int = 0
    no_interval: int = 0
    nonzero_base: int = 0
    covered_nonzero: int = 0
    n_intervals: int = 0
    width_sum: float = 0.0

    @property
    def coverage(self) -> float:
        return self.covered / self.sim_count

    @property
    def se(self) -> float:
        c = self.coverage
        return math.sqrt(c * (1 - c) / self.sim_count)

    @property
    def conditional_coverage(self) -> float:
        """Coverage among repetitions whose base estimate is defined and non-zero."""
        return self.covered_nonzero / self.nonzero_base if self.nonzero_base else math.nan

    @property
    def mean_width(self) -> float:
        return self.width_sum / self.n_intervals if self.n_intervals else math.nan


@dataclass(frozen=True)
class CoverageTable:
    cells: tuple[CoverageCell, ...]
    level: float

    def __len__(self):
        return len(self.cells)

    def cell(self, scheme: str, method, p: float, h: int) -> CoverageCell:
        method = str(method)
        for c in self.cells:
            if c.scheme == scheme and c.method == method and c.p == p and c.h == h:
                return c
        raise KeyError((scheme, method, p, h))

    def select(self, scheme: str, method, p: float, lags=None) -> list[CoverageCell]:
        method = str(method)
        out = [c for c in self.cells if c.scheme == scheme and c.method == method and c.p == p]
        if lags is not None:
            lags = set(lags)
            out = [c for c in out if c.h in lags]
        return sorted(out, key=lambda c: c.h)

    def average_coverage(self, scheme: str, method, p: float, lags=None) -> tuple[float, float]:
        """
        Coverage averaged over lags and its Monte Carlo standard error.

        The standard error treats lags as independent, ``sqrt(sum se_h^2) / L``.
        """
        sel = self.select(scheme, method, p, lags)
        if not sel:
            raise KeyError((scheme, str(method), p))
        cov = float(np.mean([c.coverage for c in sel]))
        se = math.sqrt(sum(c.se**2 for c in sel)) / len(sel)
        return cov, se

    def average_conditional_coverage(self, scheme: str, method, p: float, lags=None) -> float:
        sel = self.select(scheme, method, p, lags)
        covered = sum(c.covered_nonzero for c in sel)
        total = sum(c.nonzero_base for c in sel)
        return covered / total if total else math.nan


def _truths(config: ExperimentConfig, cache_dir) -> dict[float, np.ndarray]:
    if config.truth == "analytic":
        ref = analytic_extremogram(config.model, config.h_max)
        return {p: ref for p in config.truth_thresholds()}
    return {
        p: cached_oracle(
            config.model,
            EmpiricalQuantile(p),
            config.h_max,
            config.oracle_series_count,
            config.oracle_series_length,
            config.oracle_seed,
            cache_dir=cache_dir,
        ).values
        for p in config.truth_thresholds()
    }


def build_oracles(config: ExperimentConfig, threads: int = 1, cache_dir=None) -> dict:
    """Compute (or load) the pre-asymptotic reference for every truth threshold."""
    ps = config.truth_thresholds()
    oracles = preasymptotic_extremograms(
        config.model,
        [EmpiricalQuantile(p) for p in ps],
        config.h_max,
        config.oracle_series_count,
        config.oracle_series_length,
        config.oracle_seed,
        workers=threads,
        cache_dir=cache_dir,
    )
    return dict(zip(ps, oracles))


def _replicates(config: ExperimentConfig, series, rep: int, thresholds: dict[float, float]):
    n, h_max, B = config.n, config.h_max, config.B
    out = {}
    for s in config.schemes:
        g = rngmod.stream(config.seed, rngmod.BOOTSTRAP, rep, SCHEMES.index(s))
        if s == MULTIPLIER:
            m = BlockScheme(n, config.block_length).block_count
            xi = sample_multipliers(B * m, g, config.multiplier).reshape(B, m)
            out[s] = {p: multiplier_replicates(series, a, DEFAULT_PAIR, h_max, config.block_length, xi)
                      for p, a in thresholds.items()}
        elif s == STATIONARY_DMC:
            idx = stationary_indices(n + h_max, config.block_length, g, B, config.wrap)
            out[s] = {p: dmc_replicates(series, a, DEFAULT_PAIR, h_max, idx) for p, a in thresholds.items()}
        else:
            idx = stationary_indices(n, config.block_length, g, B, config.wrap)
            out[s] = {p: modified_replicates(series, a, DEFAULT_PAIR, h_max, idx) for p, a in thresholds.items()}
    return out


# per-repetition outcome codes
_COVERED, _MISSED, _UNDEFINED, _NO_INTERVAL = 0, 1, 2, 3


def _repetition(config: ExperimentConfig, truths, rep: int):
    h_max, n = config.h_max, config.n
    series = simulate(config.model, n + h_max, rngmod.stream(config.seed, rngmod.SERIES, rep))
    thresholds = {p: estimate_threshold(series, EmpiricalQuantile(p), n=n) for p in config.needed_thresholds()}
    base = {p: empirical_extremogram(series, a, DEFAULT_PAIR, h_max).values for p, a in thresholds.items()}
    reps = _replicates(config, series, rep, thresholds)
    alpha = config.alpha
    results = {}
    for s in config.schemes:
        for method in config.ci_methods:
            if method == DIRECT:
                targets = [(p, p, p) for p in config.thresholds]
            else:
                targets = [(method.p1, method.p1, method.p2)]
            for label_p, p1, p2 in targets:
                truth = truths[p1]
                outcome = np.empty(h_max, dtype=np.int8)
                width = np.full(h_max, np.nan)
                nonzero = np.zeros(h_max, dtype=bool)
                for h in range(1, h_max + 1):
                    b1, b2 = base[p1][h], base[p2][h]
                    nonzero[h - 1] = (not math.isnan(b1)) and b1 != 0
                    if math.isnan(b1) or math.isnan(b2):
                        outcome[h - 1] = _UNDEFINED
                        continue
                    try:
                        lo, hi, _ = bootstrap_quantiles(reps[s][p2][:, h], alpha)
                    except NoIntervalError:
                        outcome[h - 1] = _NO_INTERVAL
                        continue
                    if method == DIRECT:
                        ci = ci_direct(b1, lo, hi, config.level)
                    else:
                        ci = ci_transfer(b1, b2, lo, hi, p1, p2, config.level)
                    outcome[h - 1] = _COVERED if ci.covers(truth[h]) else _MISSED
                    width[h - 1] = ci.width
                results[(s, str(method), label_p)] = (outcome, width, nonzero)
    return results


def run_coverage_experiment(config: ExperimentConfig, threads: int = 1, cache_dir=None) -> CoverageTable:
    """
    Run ``config.sim_count`` repetitions and tabulate coverage for lags ``1..h_max``.

    Raises
    ------
    MissingOracleError
        If ``config.truth == "oracle"`` and a reference has not been built
        (see :func:`build_oracles`).
    """
    check_config(config)
    truths = _truths(config, cache_dir)
    reps = range(config.sim_count)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(lambda r: _repetition(config, truths, r), reps))
    else:
        results = [_repetition(config, truths, r) for r in reps]

    cells = []
    for key in results[0]:
        s, method, p = key
        outcome = np.stack([res[key][0] for res in results])
        width = np.stack([res[key][1] for res in results])
        nonzero = np.stack([res[key][2] for res in results])
        for h in range(1, config.h_max + 1):
            o, w, nz = outcome[:, h - 1], width[:, h - 1], nonzero[:, h - 1]
            ok = ~np.isnan(w)
            width_sum = 0.0
            for v in w[ok]:  # fixed summation order
                width_sum += float(v)
            cells.append(
                CoverageCell(
                    scheme=s,
                    method=method,
                    p=p,
                    h=h,
                    sim_count=config.sim_count,
                    covered=int(np.sum(o == _COVERED)),
                    noncovered=int(np.sum((o == _MISSED) | (o == _NO_INTERVAL))),
                    undefined_base=int(np.sum(o == _UNDEFINED)),
                    no_interval=int(np.sum(o == _NO_INTERVAL)),
                    nonzero_base=int(np.sum(nz)),
                    covered_nonzero=int(np.sum(nz & (o == _COVERED))),
                    n_intervals=int(ok.sum()),
                    width_sum=width_sum,
                )
            )
    return CoverageTable(tuple(cells), config.level)


# reports ----------------------------------------------------------------------------------

_COUNT_FIELDS = [f.name for f in fields(CoverageCell)]
_DERIVED = ["coverage", "se", "conditional_coverage", "mean_width"]


def _fmt(v) -> str:
    if isinstance(v, float):
        return "NA" if math.isnan(v) else repr(v)
    return str(v)


def emit_report(table: CoverageTable, out_dir: str | os.PathLike, formats=("csv", "plot")) -> list[Path]:
    """
    Write ``coverage.csv`` (one row per cell) and/or per-panel plot data.

    Plot data: one file per ``(method, p)`` panel named
    ``plot_<method>_p<p>.csv`` with columns ``h``, one column per scheme and
    ``nominal``.
    """
    if not table.cells:
        raise ValueError("coverage table is empty; nothing to report")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create report directory {out}: {exc}") from exc
    written = []
    try:
        if "csv" in formats:
            path = out / "coverage.csv"
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(_COUNT_FIELDS + _DERIVED + ["nominal"])
                for c in table.cells:
                    row = [getattr(c, f) for f in _COUNT_FIELDS] + [getattr(c, d) for d in _DERIVED]
                    writer.writerow([_fmt(v) for v in row] + [_fmt(table.level)])
            written.append(path)
        if "plot" in formats:
            panels: dict[tuple[str, float], dict[str, dict[int, float]]] = {}
            for c in table.cells:
                panels.setdefault((c.method, c.p), {}).setdefault(c.scheme, {})[c.h] = c.coverage
            for (method, p), series in panels.items():
                schemes = [s for s in SCHEMES if s in series]
                lags = sorted({h for s in schemes for h in series[s]})
                name = f"plot_{method.replace(':', '_')}_p{p!r}.csv"
                path = out / name
                with open(path, "w", newline="") as fh:
                    writer = csv.writer(fh, lineterminator="\n")
                    writer.writerow(["h"] + schemes + ["nominal"])
                    for h in lags:
                        writer.writerow([h] + [_fmt(series[s].get(h, math.nan)) for s in schemes] + [_fmt(table.level)])
                written.append(path)
    except OSError as exc:
        raise OSError(f"cannot write report to {out}: {exc}") from exc
    return written


def read_coverage_csv(path: str | os.PathLike) -> CoverageTable:
    types = {f.name: f.type for f in fields(CoverageCell)}
    cells, level = [], None
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            kwargs = {}
            for name in _COUNT_FIELDS:
                t = types[name]
                v = row[name]
                kwargs[name] = (
                    int(v) if t in (int, "int") else float(v) if t in (float, "float") else v
                )
            cells.append(CoverageCell(**kwargs))
            level = float(row["nominal"])
    return CoverageTable(tuple(cells), level if level is not None else math.nan)

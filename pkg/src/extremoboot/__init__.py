"""
Extremogram estimation with bootstrap confidence intervals for stationary
time series.

The main entry points are :func:`empirical_extremogram`,
:func:`bootstrap_extremogram`, :func:`ci_direct` / :func:`ci_transfer` and
:func:`run_coverage_experiment`.
"""
from .bootstrap import (
    SCHEMES,
    BootstrapReplicates,
    ConfidenceInterval,
    SimultaneousBand,
    bootstrap_extremogram,
    bootstrap_quantiles,
    ci_direct,
    ci_transfer,
    multiplier_bootstrap_extremogram,
    simultaneous_band,
    stationary_bootstrap_dmc,
    stationary_bootstrap_modified,
)
from .core import (
    BlockScheme,
    EmpiricalQuantile,
    Fixed,
    OrderStatistic,
    OrthantSetPair,
    TimeSeries,
    estimate_threshold,
    partition_blocks,
    read_series_csv,
    write_series_csv,
)
from .errors import (
    ConfigError,
    DegenerateNormalizationError,
    DegenerateThresholdError,
    MissingOracleError,
    NoBandError,
    NoIntervalError,
)
from .extremogram import (
    ExtremogramEstimate,
    PreasymptoticOracle,
    analytic_extremogram,
    empirical_extremogram,
    empirical_extremogram_estimated,
    linear_process_extremogram,
    preasymptotic_extremogram,
)
from .harness import CoverageTable, ExperimentConfig, Transfer, emit_report, load_config, run_coverage_experiment
from .models import Ar1, Garch, Ma, StudentT, SymmetrizedFrechet, simulate

__version__ = "0.1.0"

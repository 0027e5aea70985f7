"""
Command-line interface.

Subcommands::

    extremoboot simulate    --model garch --length 2010 --out series.csv
    extremoboot extremogram --input series.csv --p 0.05 --hmax 10
    extremoboot bootstrap   --input series.csv --scheme multiplier --p1 0.01 --p2 0.05 --B 1000
    extremoboot oracle      --config garch.cfg
    extremoboot coverage    --config garch.cfg --seed 42 --out report/

Every subcommand accepts ``--seed``, ``--threads``, ``--config``, ``--out``
and ``--cache-dir``.  Exit status is 0 on success and 1 otherwise, with a
one-line ``error: ...`` diagnostic on stderr.
"""
from __future__ import annotations

import argparse
import contextlib
import logging
import math
import sys
import warnings
from dataclasses import replace
from pathlib import Path

from . import rng as rngmod
from .bootstrap import (
    SCHEMES,
    bootstrap_extremogram,
    bootstrap_quantiles,
    ci_direct,
    ci_transfer,
    simultaneous_band,
    write_replicates_csv,
)
from .core import EmpiricalQuantile, Fixed, OrderStatistic, read_series_csv, write_series_csv
from .errors import NoIntervalError
from .extremogram import empirical_extremogram_estimated
from .harness import (
    ExperimentConfig,
    build_oracles,
    emit_report,
    load_config,
    parse_config,
    run_coverage_experiment,
)
from .models import simulate

__all__ = ["build_parser", "main"]


def _fmt(v: float) -> str:
    return "NA" if math.isnan(v) else f"{v:.10g}"


@contextlib.contextmanager
def _output(path):
    if path is None or str(path) == "-":
        yield sys.stdout
    else:
        with open(path, "w") as fh:
            yield fh


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg


def _threshold_spec(args):
    given = [x for x in (args.p, args.k, args.threshold) if x is not None]
    if len(given) > 1:
        raise ValueError("give at most one of --p, --k, --threshold")
    if args.k is not None:
        return OrderStatistic(args.k)
    if args.threshold is not None:
        return Fixed(args.threshold)
    return EmpiricalQuantile(0.05 if args.p is None else args.p)


# subcommands ------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    if args.config:
        model = load_config(args.config).model
    else:
        text = f"model = {args.model}\n"
        if args.phi is not None:
            text += f"phi = {args.phi}\n"
        if args.coefficients is not None:
            text += f"coefficients = {args.coefficients}\n"
        model = parse_config(text).model
    seed = 0 if args.seed is None else args.seed
    series = simulate(model, args.length, rngmod.stream(seed, rngmod.SERIES, 0))
    write_series_csv(series, sys.stdout if args.out in (None, "-") else args.out, header=args.header)
    return 0


def cmd_extremogram(args) -> int:
    series = read_series_csv(args.input, header=args.header)
    est = empirical_extremogram_estimated(series, _threshold_spec(args), h_max=args.hmax,
                                          denominator=args.denominator)
    with _output(args.out) as fh:
        for h in range(args.hmax + 1):
            fh.write(f"{h}, {_fmt(est.values[h])}, {int(est.joint_counts[h])}, "
                     f"{est.marginal_count}, {est.threshold:.10g}\n")
    return 0


def cmd_bootstrap(args) -> int:
    series = read_series_csv(args.input, header=args.header)
    seed = 0 if args.seed is None else args.seed
    if (args.p1 is None) != (args.p2 is None):
        raise ValueError("--p1 and --p2 must be given together")
    transfer = args.p1 is not None
    p_boot = args.p2 if transfer else (0.05 if args.p is None else args.p)
    kw = dict(scheme=args.scheme, B=args.B, r=args.r, seed=seed, h_max=args.hmax,
              multiplier=args.multiplier, wrap=args.wrap)
    reps = bootstrap_extremogram(series, EmpiricalQuantile(p_boot), **kw)
    base_boot = reps.base.values
    base = empirical_extremogram_estimated(series, EmpiricalQuantile(args.p1), h_max=args.hmax).values \
        if transfer else base_boot
    level = 1.0 - args.alpha
    with _output(args.out) as fh:
        fh.write("h, rho_hat, lower, upper\n")
        for h in range(1, args.hmax + 1):
            try:
                lo, hi, _ = bootstrap_quantiles(reps.values[:, h], args.alpha)
            except NoIntervalError:
                fh.write(f"{h}, {_fmt(base[h])}, NA, NA\n")
                continue
            if transfer:
                ci = ci_transfer(base[h], base_boot[h], lo, hi, args.p1, args.p2, level)
            else:
                ci = ci_direct(base[h], lo, hi, level)
            fh.write(f"{h}, {_fmt(base[h])}, {_fmt(ci.lower)}, {_fmt(ci.upper)}\n")
        if args.band:
            band = simultaneous_band(reps.values, base_boot, level, lags=range(1, args.hmax + 1))
            fh.write(f"band_radius, {band.radius:.10g}, rows_used, {band.rows_used}\n")
    if args.replicates_out:
        write_replicates_csv(reps, args.replicates_out)
    return 0


def cmd_oracle(args) -> int:
    cfg = _config(args)
    if args.series_count is not None:
        cfg = replace(cfg, oracle_series_count=args.series_count)
    if args.series_length is not None:
        cfg = replace(cfg, oracle_series_length=args.series_length)
    oracles = build_oracles(cfg, threads=args.threads, cache_dir=args.cache_dir)
    for p, o in oracles.items():
        print(f"p={p!r} threshold={o.threshold:.10g} rho(1)={_fmt(o.values[1])} key={o.key}")
    return 0


def cmd_coverage(args) -> int:
    if not args.config:
        raise ValueError("coverage needs --config")
    cfg = _config(args)
    table = run_coverage_experiment(cfg, threads=args.threads, cache_dir=args.cache_dir)
    out = Path("." if args.out is None else args.out)
    for path in emit_report(table, out, formats=tuple(args.format)):
        print(path)
    return 0


# parser -----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="root seed (default 0 or the config value)")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--config", default=None, help="flat key = value experiment file")
    common.add_argument("--out", default=None, help="output file or directory")
    common.add_argument("--cache-dir", default=None, help="oracle cache (default $EXTREMOBOOT_CACHE)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="extremoboot", description="Extremogram estimation and bootstrap intervals.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="write a simulated series as CSV")
    p.add_argument("--model", choices=("garch", "ar1", "ma"), default="garch")
    p.add_argument("--length", type=int, default=2010)
    p.add_argument("--phi", type=float, default=None)
    p.add_argument("--coefficients", default=None, help="MA coefficients, comma separated")
    p.add_argument("--header", action="store_true")
    p.set_defaults(func=cmd_simulate)

    def series_args(p):
        p.add_argument("--input", required=True)
        p.add_argument("--header", action="store_true", help="input has a header row")
        p.add_argument("--hmax", type=int, default=10)

    p = sub.add_parser("extremogram", parents=[common], help="print per-lag estimates")
    series_args(p)
    p.add_argument("--p", type=float, default=None, help="exceedance probability (default 0.05)")
    p.add_argument("--k", type=float, default=None, help="order-statistic threshold n/k")
    p.add_argument("--threshold", type=float, default=None, help="fixed threshold")
    p.add_argument("--denominator", choices=("modified", "full"), default="modified")
    p.set_defaults(func=cmd_extremogram)

    p = sub.add_parser("bootstrap", parents=[common], help="print bootstrap confidence intervals")
    series_args(p)
    p.add_argument("--scheme", choices=SCHEMES, default="multiplier")
    p.add_argument("--p", type=float, default=None, help="exceedance probability for direct intervals")
    p.add_argument("--p1", type=float, default=None, help="target probability for transfer intervals")
    p.add_argument("--p2", type=float, default=None, help="bootstrap probability for transfer intervals")
    p.add_argument("--B", type=int, default=1000)
    p.add_argument("--r", type=int, default=100, help="block length")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--multiplier", choices=("student_t", "normal"), default="student_t")
    p.add_argument("--wrap", choices=("modular", "circular"), default="modular")
    p.add_argument("--band", action="store_true", help="also print the simultaneous band radius")
    p.add_argument("--replicates-out", default=None)
    p.set_defaults(func=cmd_bootstrap)

    p = sub.add_parser("oracle", parents=[common], help="build the pre-asymptotic reference cache")
    p.add_argument("--series-count", type=int, default=None)
    p.add_argument("--series-length", type=int, default=None)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("coverage", parents=[common], help="run a coverage experiment")
    p.add_argument("--format", nargs="+", choices=("csv", "plot"), default=["csv", "plot"])
    p.set_defaults(func=cmd_coverage)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except Exception as exc:  # one-line diagnostic, no traceback
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

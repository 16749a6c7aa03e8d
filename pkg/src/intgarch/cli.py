"""Command-line front end: reproducible batch workflows emitting CSV/JSON.

Exit codes: 0 success, 2 stationarity gate, 3 numerical or degenerate data,
64 usage, 66 file I/O or malformed input.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import data as dataio
from .errors import (
    BadBar,
    ConfigError,
    IntGarchError,
    NotMeanStationary,
    NotWeaklyStationary,
    ParseError,
    UsageError,
)
from .estimate import (
    TABLE1_MODELS,
    FitConfig,
    fit,
    replication_study,
    summarize_replications,
)
from .intervals import Interval, sample_corr
from .moments import IntGarchParams, acf, is_mean_stationary, is_weakly_stationary, summarize
from .simulate import SimConfig, simulate

EXIT_OK = 0
EXIT_NONSTATIONARY = 2
EXIT_NUMERIC = 3
EXIT_USAGE = 64
EXIT_IO = 66


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _coef_list(text: str) -> tuple:
    if text.strip() == "":
        return ()
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"bad coefficient list {text!r}") from None


def _add_param_flags(p: argparse.ArgumentParser, required: bool = True):
    p.add_argument("--k", type=float, required=required)
    p.add_argument("--mu", type=float, required=required)
    p.add_argument("--alpha", type=_coef_list, required=required)
    p.add_argument("--beta", type=_coef_list, required=required)
    p.add_argument("--gamma", type=_coef_list, default=())


def _params_from_args(args) -> IntGarchParams:
    try:
        return IntGarchParams(
            k=args.k, mu=args.mu, alpha=args.alpha, beta=args.beta, gamma=args.gamma
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _h0_mode(text: str):
    if text in ("stationary_mean", "zero"):
        return text
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"bad --h0 value {text!r}") from None


def _r0_mode(text: str):
    if text == "stationary_mean":
        return text
    try:
        lo, hi = (float(v) for v in text.split(","))
        return Interval.from_endpoints(lo, hi)
    except ValueError:
        raise UsageError(f"bad --r0 value {text!r} (use stationary_mean or LOW,HIGH)") from None


def _check_stationary(params: IntGarchParams):
    if params.order == (1, 1, 1) or (params.p == 1 and params.q == 1 and params.w == 0):
        if not is_weakly_stationary(params):
            raise NotWeaklyStationary("parameters fail the weak stationarity gate")
    elif not is_mean_stationary(params):
        raise NotMeanStationary("parameters fail the mean stationarity gate")


def build_parser() -> _Parser:
    root = _Parser(prog="intgarch", description=__doc__)
    sub = root.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a path and write series/h CSVs")
    _add_param_flags(p)
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--burn-in", type=int, default=1000)
    p.add_argument("--h0", type=_h0_mode, default="stationary_mean")
    p.add_argument("--r0", type=_r0_mode, default="stationary_mean")
    p.add_argument("--require-stationary", action="store_true")
    p.add_argument("--out-series", required=True)
    p.add_argument("--out-h", required=True)

    p = sub.add_parser("check", help="print closed-form moments and stationarity verdicts")
    _add_param_flags(p)

    p = sub.add_parser("acf", help="theoretical or sample interval ACF as CSV")
    _add_param_flags(p, required=False)
    p.add_argument("--input", help="range-series CSV for sample mode")
    p.add_argument("--max-lag", type=int, required=True)
    p.add_argument("--out")

    p = sub.add_parser("fit", help="conditional least squares fit of a range series")
    p.add_argument("--input", required=True)
    p.add_argument("--emit-h", help="write the fitted volatility path H_t to a CSV")
    p.add_argument("--max-iterations", type=int, default=500)
    p.add_argument("--step-tolerance", type=float, default=1e-8)
    p.add_argument("--k-handling", choices=("fixed_at_initial", "alternating"),
                   default="fixed_at_initial")
    p.add_argument("--gradient-mode", choices=("paper_frozen", "exact_recursive"),
                   default="paper_frozen")

    p = sub.add_parser("ingest", help="OHLC CSV to range-series and flagged-days CSVs")
    p.add_argument("--ohlc", required=True)
    p.add_argument("--out-series", required=True)
    p.add_argument("--out-flags", required=True)

    p = sub.add_parser("compare", help="volatility comparison table (model vs GARCH vs RV)")
    p.add_argument("--ohlc", required=True)
    p.add_argument("--intraday")
    p.add_argument("--grid-minutes", type=int, default=5)
    p.add_argument("--out", required=True)

    p = sub.add_parser("table1", help="replication study: mean estimates, bias, SD")
    p.add_argument("--model", choices=sorted(TABLE1_MODELS), required=True)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)

    return root


def _emit_json(payload: dict) -> None:
    print(json.dumps(payload, indent=2))


def _run_simulate(args) -> int:
    params = _params_from_args(args)
    if args.require_stationary:
        _check_stationary(params)
    cfg = SimConfig(
        params=params,
        length=args.length,
        seed=args.seed,
        burn_in=args.burn_in,
        h0_mode=args.h0,
        r0_mode=args.r0,
    )
    out = simulate(cfg)
    dataio.write_series_csv(out.series, args.out_series)
    dataio.write_h_csv(out.series.timestamps, out.h_path, args.out_h)
    return EXIT_OK


def _run_check(args) -> int:
    params = _params_from_args(args)
    s = summarize(params)
    _emit_json(
        {
            "c1": s.c1,
            "c2": s.c2,
            "mean_h": s.mean_h,
            "second_moment_h": s.second_moment_h,
            "var_r": s.var_r,
            "mean_stationary": s.mean_stationary,
            "weakly_stationary": s.weakly_stationary,
            "degenerate": s.degenerate,
        }
    )
    return EXIT_OK


def _run_acf(args) -> int:
    if args.max_lag < 0:
        raise UsageError("--max-lag must be >= 0")
    lags = range(args.max_lag + 1)
    if args.input is not None:
        series = dataio.read_series_csv(args.input)
        values = [sample_corr(series, s) for s in lags]
    else:
        if args.k is None or args.mu is None or args.alpha is None or args.beta is None:
            raise UsageError("acf needs either --input or the full parameter flags")
        params = _params_from_args(args)
        values = [acf(params, s) for s in lags]
    if args.out is not None:
        dataio.write_acf_csv(lags, values, args.out)
    else:
        print("lag,acf")
        for s, v in zip(lags, values):
            print(f"{s},{v:.17g}")
    return EXIT_OK


def _run_fit(args) -> int:
    series = dataio.read_series_csv(args.input)
    cfg = FitConfig(
        max_iterations=args.max_iterations,
        step_tolerance=args.step_tolerance,
        k_handling=args.k_handling,
        gradient_mode=args.gradient_mode,
    )
    fr = fit(series, cfg)
    e = fr.params
    _emit_json(
        {
            "k": e.k,
            "mu": e.mu,
            "alpha1": e.alpha[0],
            "beta1": e.beta[0],
            "gamma1": e.gamma[0] if e.w else 0.0,
            "loss": fr.loss,
            "iterations": fr.iterations,
            "converged": fr.converged,
            "k_fixed": fr.k_fixed,
        }
    )
    if args.emit_h is not None:
        dataio.write_h_csv(series.timestamps, fr.volatility_path, args.emit_h, column="H")
    return EXIT_OK


def _run_ingest(args) -> int:
    days = dataio.read_ohlc_csv(args.ohlc)
    series = dataio.return_ranges(days)
    dataio.write_series_csv(series, args.out_series)
    flags = dataio.flag_quiet_wide_days(series)
    dataio.write_flags_csv(series, flags, args.out_flags)
    return EXIT_OK


def _run_compare(args) -> int:
    days = dataio.read_ohlc_csv(args.ohlc)
    series = dataio.return_ranges(days)
    fr = fit(series)
    closes = np.log([d.close for d in days])
    returns = np.diff(closes)
    garch = dataio.fit_garch11(returns)
    rv_by_date = {}
    if args.intraday is not None:
        for day in dataio.read_intraday_csv(args.intraday):
            rv_by_date[day.date] = dataio.realized_volatility(day, args.grid_minutes)
    rv = [rv_by_date.get(t) for t in series.timestamps]
    dataio.write_comparison_csv(
        series.timestamps, fr.volatility_path, garch.sigma, rv, args.out
    )
    return EXIT_OK


def _run_table1(args) -> int:
    truth = TABLE1_MODELS[args.model]

    def log_progress(i, est):
        sys.stderr.write(
            f"replication {i + 1}/{args.reps}: "
            + " ".join(f"{v:.4f}" for v in est)
            + "\n"
        )

    estimates = replication_study(
        truth, args.reps, args.length, args.seed, progress=log_progress
    )
    rows = summarize_replications(estimates, truth)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(
            fh,
            fieldnames=[
                "parameter",
                "truth",
                "mean_estimate",
                "mean_abs_bias",
                "abs_mean_bias",
                "empirical_sd",
            ],
        )
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return EXIT_OK


_RUNNERS = {
    "simulate": _run_simulate,
    "check": _run_check,
    "acf": _run_acf,
    "fit": _run_fit,
    "ingest": _run_ingest,
    "compare": _run_compare,
    "table1": _run_table1,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _RUNNERS[args.command](args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NotMeanStationary, NotWeaklyStationary) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONSTATIONARY
    except (ParseError, BadBar) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except IntGarchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()

"""Command-line interface binding the library into reproducible runs.

Every subcommand writes its primary output plus a ``<out>.manifest.json``
recording the full parameter set and master seed, which is sufficient to
reproduce the run exactly.  Diagnostic outcomes (rejections, identified
orders) are data, not errors: the exit code is 0 whenever the run completed.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .calibration import CalibrationCache
from .errors import PeflocError
from .inference import (
    fit_par_yw,
    identify_par_order,
    identify_pma_order,
    portmanteau_test,
    residual_series,
)
from .measures import FMT, pefloacf_table, peflopacf_table, SeasonalLagTable
from .models import PeriodicModel, PeriodicSeries, gen_ipd_stable, gen_parma
from .pipeline import (
    ExperimentGrid,
    ingest_csv,
    replicate_order_grid,
    replicate_power_grid,
    save_grid,
)
from .stable import FlocParams, stream


def _write_manifest(out_path: str, args: argparse.Namespace):
    payload = {k: v for k, v in vars(args).items() if k != "func"}
    payload["version"] = __version__
    with open(f"{out_path}.manifest.json", "w") as f:
        json.dump(payload, f, indent=2, default=str)


def _write_series_csv(path: str, series: PeriodicSeries):
    with open(path, "w") as f:
        f.write("value\n")
        for v in series.values:
            f.write(f"{FMT % v}\n")


def _parse_seasonal(text: str, what: str) -> np.ndarray:
    """Parse 'a,b;c,d' into a (T, order) array: rows = seasons, cols = lags."""
    try:
        rows = [[float(x) for x in row.split(",")] for row in text.split(";")]
    except ValueError as exc:
        raise PeflocError(f"cannot parse {what} spec {text!r}") from exc
    width = max(len(r) for r in rows)
    return np.array([r + [0.0] * (width - len(r)) for r in rows])


def _load_model(args) -> PeriodicModel:
    if args.model:
        with open(args.model) as f:
            spec = json.load(f)
        return PeriodicModel(
            period=spec["period"],
            ar_coeffs=np.array(spec.get("ar", []), dtype=float).reshape(
                spec["period"], -1
            ),
            ma_coeffs=np.array(spec.get("ma", []), dtype=float).reshape(
                spec["period"], -1
            ),
            alpha=spec.get("alpha", 1.7),
            scales=spec.get("sigma"),
        )
    T = args.T
    ar = _parse_seasonal(args.phi, "--phi").reshape(T, -1) if args.phi else np.empty((T, 0))
    ma = _parse_seasonal(args.theta, "--theta").reshape(T, -1) if args.theta else np.empty((T, 0))
    sigma = [float(s) for s in args.sigma.split(",")] if args.sigma else None
    return PeriodicModel(T, ar, ma, alpha=args.alpha, scales=sigma)


def cmd_simulate(args) -> int:
    rng = stream(args.seed)
    if args.family == "ipd":
        sigma = [float(s) for s in args.sigma.split(",")] if args.sigma else [1.0] * args.T
        series = gen_ipd_stable(args.T, sigma, args.alpha, args.nt // args.T, rng)
    else:
        model = _load_model(args)
        series = gen_parma(model, args.nt // model.period, rng)
    _write_series_csv(args.out, series)
    _write_manifest(args.out, args)
    print(f"wrote {len(series)} samples to {args.out}")
    return 0


def _read_input(args) -> PeriodicSeries:
    return ingest_csv(args.input, args.column, args.T)


def cmd_measure(args) -> int:
    series = _read_input(args)
    if args.measure == "peflopacf":
        table = peflopacf_table(series, args.B, range(1, args.hmax + 1))
    else:
        fp = FlocParams(args.A, args.B)
        lags = range(-args.hmax, args.hmax + 1)
        if args.measure == "pefloacf":
            table = pefloacf_table(series, fp, lags)
        else:
            from .measures import sample_pefloacvf

            values = {
                (v, h): sample_pefloacvf(series, v, h, fp)
                for v in range(1, series.period + 1)
                for h in lags
            }
            table = SeasonalLagTable(series.period, list(lags), values, meta=fp)
    table.to_csv(args.out)
    _write_manifest(args.out, args)
    print(f"wrote {args.measure} table to {args.out}")
    return 0


def cmd_test(args) -> int:
    series = _read_input(args)
    cache = CalibrationCache()
    result = portmanteau_test(
        series,
        args.alpha,
        FlocParams(args.A, args.B),
        args.hmax,
        level=args.level,
        m=args.m,
        seed=args.seed,
        cache=cache,
    )
    print(result.to_table())
    if args.out:
        with open(args.out, "w") as f:
            f.write(result.to_json())
        _write_manifest(args.out, args)
    return 0


def cmd_identify(args) -> int:
    series = _read_input(args)
    cache = CalibrationCache()
    if args.family == "par":
        result = identify_par_order(
            series, args.alpha, args.B, args.hmax, args.d, args.m, args.seed, cache
        )
        label = "p"
    else:
        result = identify_pma_order(
            series,
            args.alpha,
            FlocParams(args.A, args.B),
            args.hmax,
            args.d,
            args.m,
            args.seed,
            cache,
        )
        label = "q"
    for v, order in enumerate(result.seasonal, start=1):
        print(f"{label}({v}) = {order}")
    print(f"global {label} = {result.global_order}")
    if args.out:
        with open(args.out, "w") as f:
            f.write(result.to_json())
        _write_manifest(args.out, args)
    return 0


def cmd_fit(args) -> int:
    series = _read_input(args)
    cache = CalibrationCache()
    order = identify_par_order(
        series, args.alpha, args.B, args.hmax, args.d, args.m, args.seed, cache
    )
    fit = fit_par_yw(series, order.seasonal, args.B)
    print(fit.to_table())
    if fit.offset == 0:
        print("all seasonal orders are 0: residuals equal the input series")
        res = series
    else:
        res = residual_series(series, fit)
    diag = portmanteau_test(
        res,
        args.alpha,
        FlocParams(args.test_A, args.test_B),
        args.test_hmax,
        level=args.level,
        m=args.m,
        seed=args.seed,
        cache=cache,
    )
    print("\nresidual portmanteau diagnostics:")
    print(diag.to_table())
    if args.out:
        payload = {
            "seasonal_orders": order.seasonal.tolist(),
            "coeffs": [[FMT % c for c in row] for row in fit.coeffs],
            "residual_diagnostics": json.loads(diag.to_json()),
        }
        with open(args.out, "w") as f:
            json.dump(payload, f, indent=2)
        _write_manifest(args.out, args)
    return 0


def cmd_replicate(args) -> int:
    family = "par" if args.figure.endswith("par") else "pma"
    kind = "power" if args.figure.startswith("power") else "order"
    coef = (
        np.array([float(c) for c in args.grid.split(",")])
        if args.grid
        else np.round(np.arange(-0.9, 1.0, 0.2), 1)
    )
    if kind == "power":
        grid = ExperimentGrid(
            family,
            coef,
            nt=args.nt,
            n_reps=args.reps,
            fp=FlocParams(0.8, 0.8),
            h_max=3,
            level=0.05,
            m_calib=args.m,
        )
        frame = replicate_power_grid(grid, args.seed, CalibrationCache(), args.jobs)
    else:
        fp = FlocParams(0.8, 0.8) if family == "pma" else FlocParams(1.0, 0.6)
        grid = ExperimentGrid(
            family,
            coef,
            nt=args.nt,
            n_reps=args.reps,
            fp=fp,
            b_exp=0.6,
            h_max=5,
            level=0.99,
            m_calib=args.m,
        )
        frame = replicate_order_grid(grid, args.seed, CalibrationCache(), args.jobs)
    save_grid(frame, args.out)
    _write_manifest(args.out, args)
    print(f"wrote {len(frame)} grid cells to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pefloc",
        description="heavy-tailed cyclostationary time series analysis",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_io(p, needs_input=True):
        if needs_input:
            p.add_argument("--input", required=True, help="input CSV path")
            p.add_argument("--column", default=None, help="column name (default: first)")
            p.add_argument("--T", type=int, required=True, help="period")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("simulate", help="simulate a trajectory")
    p.add_argument("--family", choices=["ipd", "par", "pma", "parma"], required=True)
    p.add_argument("--T", type=int, default=2)
    p.add_argument("--alpha", type=float, default=1.7)
    p.add_argument("--sigma", default=None, help="per-season scales, comma separated")
    p.add_argument("--phi", default=None, help="AR coefficients 'lags;per;season'")
    p.add_argument("--theta", default=None, help="MA coefficients 'lags;per;season'")
    p.add_argument("--model", default=None, help="JSON model file (overrides flags)")
    p.add_argument("--nt", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("measure", help="compute a seasonal lag table")
    add_io(p)
    p.add_argument("--measure", choices=["pefloacvf", "pefloacf", "peflopacf"], required=True)
    p.add_argument("--A", type=float, default=0.8)
    p.add_argument("--B", type=float, default=0.8)
    p.add_argument("--hmax", type=int, default=10)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("test", help="portmanteau dependence test")
    add_io(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--A", type=float, default=0.8)
    p.add_argument("--B", type=float, default=0.8)
    p.add_argument("--hmax", type=int, default=3)
    p.add_argument("--level", type=float, default=0.05)
    p.add_argument("--m", type=int, default=2000)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("identify", help="PAR/PMA order identification")
    add_io(p)
    p.add_argument("--family", choices=["par", "pma"], required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--A", type=float, default=0.8)
    p.add_argument("--B", type=float, default=0.6)
    p.add_argument("--hmax", type=int, default=5)
    p.add_argument("--d", type=float, default=0.99)
    p.add_argument("--m", type=int, default=2000)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("fit", help="identify orders, fit PAR, run residual diagnostics")
    add_io(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--B", type=float, default=0.6, help="partial-measure exponent")
    p.add_argument("--hmax", type=int, default=5)
    p.add_argument("--d", type=float, default=0.99)
    p.add_argument("--m", type=int, default=2000)
    p.add_argument("--level", type=float, default=0.05, help="residual test level")
    p.add_argument("--test-A", type=float, default=0.8)
    p.add_argument("--test-B", type=float, default=0.8)
    p.add_argument("--test-hmax", type=int, default=3)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("replicate", help="replicate a simulation experiment grid")
    p.add_argument(
        "--figure",
        choices=["power-par", "power-pma", "order-par", "order-pma"],
        required=True,
    )
    p.add_argument("--nt", type=int, default=1000)
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--m", type=int, default=2000)
    p.add_argument("--grid", default=None, help="coefficient values, comma separated")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker cap")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_replicate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PeflocError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

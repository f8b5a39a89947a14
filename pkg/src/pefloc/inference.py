"""Dependence testing, order identification and FLOC Yule-Walker fitting.

The portmanteau test runs one subtest per season v with statistic
kappa_v = N * sum over lags +-1..+-h_max of eta_v(h)^2, at the
Bonferroni-corrected level c/T against a Monte-Carlo critical value built
from i.i.d. S(alpha, 1) nulls.  Order identification flags sample measure
values falling outside per-lag null confidence bands.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .calibration import CalibrationCache
from .errors import EstimationError, InsufficientDataError, SingularSystemError
from .measures import (
    FMT,
    NullBands,
    _EtaCache,
    _last_from_cache,
    _wrap_season,
    null_bands,
    sample_pefloacvf,
)
from .models import PeriodicSeries, gen_ipd_stable
from .stable import FlocParams, stream

__all__ = [
    "PortmanteauResult",
    "OrderResult",
    "ParFit",
    "kappa_stats",
    "calibration_kappa_sample",
    "portmanteau_test",
    "identify_par_order",
    "identify_pma_order",
    "fit_par_yw",
    "residuals",
    "residual_series",
]


def _h_pm(h_max: int) -> list[int]:
    return [h for h in range(-h_max, h_max + 1) if h != 0]


def kappa_stats(series: PeriodicSeries, fp: FlocParams, h_max: int) -> np.ndarray:
    """Per-season portmanteau statistics kappa_v, v = 1..T."""
    cache = _EtaCache(series, fp)
    lags = _h_pm(h_max)
    n = series.n_cycles
    return np.array(
        [
            n * sum(cache.eta(v, h) ** 2 for h in lags)
            for v in range(1, series.period + 1)
        ]
    )


@dataclass
class PortmanteauResult:
    kappa: np.ndarray
    critical_value: float
    subtest_level: float
    reject_by_season: np.ndarray = field(init=False)
    reject_any: bool = field(init=False)

    def __post_init__(self):
        self.reject_by_season = self.kappa > self.critical_value
        self.reject_any = bool(self.reject_by_season.any())

    def to_json(self) -> str:
        return json.dumps(
            {
                "kappa": [FMT % k for k in self.kappa],
                "critical_value": FMT % self.critical_value,
                "subtest_level": self.subtest_level,
                "reject_by_season": self.reject_by_season.tolist(),
                "reject_any": self.reject_any,
            }
        )

    def to_table(self) -> str:
        """Human-readable summary: one row of kappa_v per season."""
        lines = ["v      kappa_v  reject"]
        for v, (k, r) in enumerate(zip(self.kappa, self.reject_by_season), start=1):
            lines.append(f"{v:<4} {k:>9.1f}  {'yes' if r else 'no'}")
        lines.append(f"critical region: ({self.critical_value:.1f}, inf)")
        return "\n".join(lines)


def calibration_kappa_sample(
    alpha: float,
    nt: int,
    period: int,
    fp: FlocParams,
    h_max: int,
    m: int,
    seed: int,
    cache: CalibrationCache | None = None,
) -> np.ndarray:
    """kappa_1 on m i.i.d. S(alpha, 1) null sequences of length nt.

    One calibration (at v = 1) serves every seasonal subtest, since the null
    is season-homogeneous.  Trajectory i uses substream i of ``seed``.
    """

    def compute():
        lags = _h_pm(h_max)
        out = np.empty(m)
        for i in range(m):
            series = gen_ipd_stable(period, 1.0, alpha, nt // period, stream(seed, i))
            cache_i = _EtaCache(series, fp)
            out[i] = series.n_cycles * sum(cache_i.eta(1, h) ** 2 for h in lags)
        return out

    if cache is None:
        return compute()
    key = {
        "kind": "kappa",
        "alpha": alpha,
        "nt": nt,
        "period": period,
        "A": fp.a_exp,
        "B": fp.b_exp,
        "h_max": h_max,
        "m": m,
        "seed": seed,
    }
    return cache.get_or_compute(key, compute)


def portmanteau_test(
    series: PeriodicSeries,
    alpha: float,
    fp: FlocParams,
    h_max: int,
    level: float = 0.05,
    m: int = 2000,
    seed: int = 0,
    cache: CalibrationCache | None = None,
    calibration: np.ndarray | None = None,
) -> PortmanteauResult:
    """Monte-Carlo-calibrated portmanteau test of the white-noise null.

    Rejects when any seasonal kappa_v exceeds the empirical quantile of
    order 1 - level/T of the null statistic sample.  A precomputed
    ``calibration`` sample (from :func:`calibration_kappa_sample`) may be
    supplied to skip recalibration.
    """
    if not 0.0 < level < 1.0:
        raise ValueError("significance level must be in (0, 1)")
    T, nt = series.period, len(series)
    if nt < 2 * T * h_max:
        raise InsufficientDataError(
            f"need NT >= {2 * T * h_max} for h_max={h_max}, got {nt}"
        )
    if calibration is None:
        calibration = calibration_kappa_sample(alpha, nt, T, fp, h_max, m, seed, cache)
    subtest_level = level / T
    critical = float(np.quantile(calibration, 1.0 - subtest_level))
    return PortmanteauResult(kappa_stats(series, fp, h_max), critical, subtest_level)


# ---------------------------------------------------------------------------
# Order identification


@dataclass
class OrderResult:
    seasonal: np.ndarray
    bands: NullBands
    flags: dict[int, list[int]]

    @property
    def global_order(self) -> int:
        return int(self.seasonal.max(initial=0))

    def to_json(self) -> str:
        return json.dumps(
            {
                "seasonal": self.seasonal.tolist(),
                "global": self.global_order,
                "flags": {str(v): lags for v, lags in self.flags.items()},
                "level": self.bands.level,
            }
        )


def _cached_bands(measure, alpha, nt, period, lags, fp, level, m, seed, cache):
    if cache is None:
        return null_bands(measure, alpha, nt, period, lags, fp, level, m, seed)

    def compute():
        bands = null_bands(measure, alpha, nt, period, lags, fp, level, m, seed)
        return [bands.lower[h] for h in lags] + [bands.upper[h] for h in lags]

    key = {
        "kind": f"bands-{measure}",
        "alpha": alpha,
        "nt": nt,
        "period": period,
        "lags": list(lags),
        "A": fp.a_exp,
        "B": fp.b_exp,
        "level": level,
        "m": m,
        "seed": seed,
    }
    flat = cache.get_or_compute(key, compute)
    k = len(lags)
    return NullBands(
        level,
        m,
        alpha,
        nt,
        period,
        dict(zip(lags, flat[:k])),
        dict(zip(lags, flat[k:])),
    )


def _identify(series, measure, lags, fp, bands, order_of_lag):
    T = series.period
    seasonal = np.zeros(T, dtype=int)
    flags: dict[int, list[int]] = {}
    if measure == "peflopacf":
        eta_cache = _EtaCache(series, FlocParams(1.0, fp.b_exp))
    else:
        eta_cache = _EtaCache(series, fp)
    for v in range(1, T + 1):
        flagged = []
        for h in lags:
            try:
                if measure == "peflopacf":
                    val = _last_from_cache(eta_cache.eta, v, h)
                else:
                    val = eta_cache.eta(v, h)
            except SingularSystemError:
                # conservative: an unsolvable lag counts as inside-band
                warnings.warn(f"singular system at (v={v}, h={h}); treated as inside band")
                continue
            if not bands.contains(h, val):
                flagged.append(h)
        flags[v] = flagged
        seasonal[v - 1] = max((order_of_lag(h) for h in flagged), default=0)
    return OrderResult(seasonal, bands, flags)


def identify_par_order(
    series: PeriodicSeries,
    alpha: float,
    b_exp: float,
    h_max: int,
    level: float = 0.99,
    m: int = 2000,
    seed: int = 0,
    cache: CalibrationCache | None = None,
    bands: NullBands | None = None,
) -> OrderResult:
    """Seasonal AR orders from the partial measure's cut-off.

    p(v) is the largest lag h in 1..h_max at which the sample zeta_v(h)
    falls outside the per-lag null band; 0 if none does.
    """
    if h_max < 1:
        raise ValueError("h_max must be >= 1")
    fp = FlocParams(1.0, b_exp)
    lags = list(range(1, h_max + 1))
    if bands is None:
        bands = _cached_bands(
            "peflopacf", alpha, len(series), series.period, lags, fp, level, m, seed, cache
        )
    return _identify(series, "peflopacf", lags, fp, bands, order_of_lag=lambda h: h)


def identify_pma_order(
    series: PeriodicSeries,
    alpha: float,
    fp: FlocParams,
    h_max: int,
    level: float = 0.99,
    m: int = 2000,
    seed: int = 0,
    cache: CalibrationCache | None = None,
    bands: NullBands | None = None,
) -> OrderResult:
    """Seasonal MA orders from the cut-off of eta_v(h) over lags +-1..+-h_max.

    q(v) is the largest |h| flagged outside its null band; negative lags are
    included because eta is asymmetric.
    """
    lags = _h_pm(h_max)
    if bands is None:
        bands = _cached_bands(
            "pefloacf", alpha, len(series), series.period, lags, fp, level, m, seed, cache
        )
    return _identify(series, "pefloacf", lags, fp, bands, order_of_lag=abs)


# ---------------------------------------------------------------------------
# FLOC Yule-Walker fitting


@dataclass
class ParFit:
    """A fitted periodic AR model: seasonal orders, coefficients, residuals."""

    seasonal_orders: np.ndarray
    coeffs: list[np.ndarray]  # coeffs[v-1] has length seasonal_orders[v-1]
    residuals: np.ndarray
    offset: int  # residuals start at 1-based index offset + 1

    def coeff(self, v: int, i: int) -> float:
        """phi_i(v), zero beyond the seasonal order."""
        row = self.coeffs[v - 1]
        return float(row[i - 1]) if i <= row.size else 0.0

    def to_table(self) -> str:
        p = int(self.seasonal_orders.max(initial=0))
        lines = ["v    p(v)  " + "  ".join(f"phi_{i}(v)" for i in range(1, p + 1))]
        for v, row in enumerate(self.coeffs, start=1):
            cells = "  ".join(f"{self.coeff(v, i):8.4f}" for i in range(1, p + 1))
            lines.append(f"{v:<4} {self.seasonal_orders[v - 1]:<5} {cells}")
        return "\n".join(lines)


def fit_par_yw(series: PeriodicSeries, seasonal_orders, b_exp: float) -> ParFit:
    """Fit a periodic AR by the FLOC Yule-Walker equations (A = 1).

    For each season v with p(v) >= 1 solves the p(v) x p(v) system with
    entries psi_{v-j}(i-j) and right-hand side psi_v(1..p(v)); seasons with
    p(v) = 0 get an empty coefficient vector.
    """
    T = series.period
    orders = np.asarray(seasonal_orders, dtype=int)
    if orders.shape != (T,):
        raise ValueError(f"need one order per season, got shape {orders.shape}")
    if np.any(orders < 0):
        raise ValueError("seasonal orders must be non-negative")
    fp = FlocParams(1.0, b_exp)
    coeffs = []
    for v in range(1, T + 1):
        p_v = int(orders[v - 1])
        if p_v == 0:
            coeffs.append(np.empty(0))
            continue
        mat = np.empty((p_v, p_v))
        for i in range(1, p_v + 1):
            for j in range(1, p_v + 1):
                mat[i - 1, j - 1] = sample_pefloacvf(
                    series, _wrap_season(v - j, T), i - j, fp
                )
        rhs = np.array(
            [sample_pefloacvf(series, v, i, fp) for i in range(1, p_v + 1)]
        )
        try:
            if np.linalg.cond(mat) > 1e12:
                raise np.linalg.LinAlgError
            coeffs.append(np.linalg.solve(mat, rhs))
        except np.linalg.LinAlgError:
            raise EstimationError(f"singular Yule-Walker system for season {v}")
    fit = ParFit(orders, coeffs, np.empty(0), int(orders.max(initial=0)))
    fit.residuals = residuals(series, fit)
    return fit


def residuals(series: PeriodicSeries, fit: ParFit) -> np.ndarray:
    """Residuals e_t = x_t - sum_i phi_i(t) x_{t-i} for t past the warm-up.

    Defined for 1-based t > max_v p(v); earlier entries are omitted.
    """
    if len(fit.coeffs) != series.period:
        raise ValueError("fit period does not match series period")
    x = series.values
    p = fit.offset
    out = np.empty(len(x) - p)
    for t in range(p + 1, len(x) + 1):
        v = series.season_of(t)
        row = fit.coeffs[v - 1]
        acc = x[t - 1]
        for i in range(1, row.size + 1):
            acc -= row[i - 1] * x[t - i - 1]
        out[t - p - 1] = acc
    return out


def residual_series(series: PeriodicSeries, fit: ParFit) -> PeriodicSeries:
    """Residuals re-aligned to whole cycles for seasonal diagnostics.

    Drops leading residuals until the next season-1 index and a trailing
    partial cycle, so the result is a valid periodic series.
    """
    T = series.period
    t0 = fit.offset + 1
    shift = (-(t0 - 1)) % T
    vals = fit.residuals[shift:]
    vals = vals[: (vals.size // T) * T]
    if vals.size == 0:
        raise InsufficientDataError("too few residuals for one full cycle")
    return PeriodicSeries(vals, T)

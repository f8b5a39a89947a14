"""Sample periodic fractional lower-order dependence measures.

Implements the seasonal FLOC autocovariance psi_v(h), its standardized
version eta_v(h) (scale invariant, equal to the classical periodic ACF when
A = B = 1), and the partial measure zeta_v(h) obtained as the last component
of a FLOC Yule-Walker solve.  Also provides Monte Carlo averaging over
simulated trajectories and per-lag null confidence bands.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDataError, InsufficientDataError, SingularSystemError
from .models import PeriodicModel, PeriodicSeries, gen_ipd_stable, gen_parma
from .stable import FlocParams, _spow, stream

__all__ = [
    "SeasonalLagTable",
    "NullBands",
    "sample_pefloacvf",
    "sample_pefloacf",
    "sample_peflopacf",
    "sample_peflopacf_acvf_variant",
    "pefloacf_table",
    "peflopacf_table",
    "mc_average_table",
    "null_bands",
]

COND_LIMIT = 1e12
FMT = "%.17g"


def _wrap_season(v: int, period: int) -> int:
    return (v - 1) % period + 1


def _window(v: int, h: int, period: int, nt: int):
    """Summation bounds [l_b, r_b] over the cycle index n.

    These are exactly the n for which both 1-based indices nT + v and
    nT + v - h fall inside 1..NT.
    """
    lb = max(-((v - 1) // period), -((v - h - 1) // period))
    rb = min((nt - v) // period, (nt - (v - h)) // period)
    return lb, rb


def sample_pefloacvf(series: PeriodicSeries, v: int, h: int, fp: FlocParams) -> float:
    """Sample seasonal FLOC autocovariance psi_v(h).

    ``(1/N) * sum_n x_{nT+v}^<A> x_{nT+v-h}^<B>`` over the boundary-correct
    cycle window.  The divisor is N even when the window holds fewer than N
    terms (a mild edge bias, kept for fidelity to the defining formula).
    """
    T, nt = series.period, len(series)
    if not 1 <= v <= T:
        raise ValueError(f"season v must be in 1..{T}, got {v}")
    lb, rb = _window(v, h, T, nt)
    if rb < lb:
        raise InsufficientDataError(f"no complete terms for (v={v}, h={h}) with NT={nt}")
    n = np.arange(lb, rb + 1)
    x = series.values
    left = _spow(x[n * T + v - 1], fp.a_exp)
    right = _spow(x[n * T + v - h - 1], fp.b_exp)
    # Sequential accumulation (cumsum, not dot) keeps the result bit-identical
    # to a term-by-term evaluation of the defining sum.
    return float(np.cumsum(left * right)[-1] / series.n_cycles)


class _EtaCache:
    """Memoized eta_v(h) evaluations sharing the per-season psi_v(0)."""

    def __init__(self, series: PeriodicSeries, fp: FlocParams):
        self.series = series
        self.fp = fp
        T = series.period
        self.psi0 = np.array(
            [sample_pefloacvf(series, v, 0, fp) for v in range(1, T + 1)]
        )
        if not np.all(self.psi0 > 0):
            bad = int(np.argmin(self.psi0)) + 1
            raise DegenerateDataError(f"season {bad} has non-positive sample FLOM")
        tot = fp.total
        self._wa = self.psi0 ** (fp.a_exp / tot)
        self._wb = self.psi0 ** (fp.b_exp / tot)
        self._memo: dict[tuple[int, int], float] = {}

    def eta(self, v: int, h: int) -> float:
        T = self.series.period
        v = _wrap_season(v, T)
        if h == 0:
            return 1.0
        key = (v, h)
        if key not in self._memo:
            psi = sample_pefloacvf(self.series, v, h, self.fp)
            vh = _wrap_season(v - h, T)
            self._memo[key] = psi / (self._wa[v - 1] * self._wb[vh - 1])
        return self._memo[key]


def sample_pefloacf(series: PeriodicSeries, v: int, h: int, fp: FlocParams) -> float:
    """Sample eta_v(h): psi_v(h) standardized by the lag-0 seasonal FLOMs.

    ``psi_v(h) / (psi_v(0)^(A/(A+B)) * psi_{v-h}(0)^(B/(A+B)))`` with the
    season index v - h wrapped modulo T.  Scale invariant; equals 1 at h = 0.
    """
    return _EtaCache(series, fp).eta(v, h)


def _solve_last(mat: np.ndarray, rhs: np.ndarray, v: int, h: int) -> float:
    if np.linalg.cond(mat) > COND_LIMIT:
        raise SingularSystemError(f"Yule-Walker system singular at (v={v}, h={h})")
    return float(np.linalg.solve(mat, rhs)[-1])


def sample_peflopacf(series: PeriodicSeries, v: int, h: int, b_exp: float) -> float:
    """Sample zeta_v(h): last component of the eta-based Yule-Walker solve.

    The h x h system has entries eta_{v-j}(i-j) and right-hand side
    eta_v(1..h); all eta terms use A = 1 and B = ``b_exp`` (the first
    exponent is fixed to 1 by the derivation of the FLOC Yule-Walker
    equations).  Negative-lag entries are evaluated by the estimator
    directly, with no symmetry shortcut.
    """
    cache = _EtaCache(series, FlocParams(1.0, b_exp))
    return _last_from_cache(cache.eta, v, h)


def sample_peflopacf_acvf_variant(
    series: PeriodicSeries, v: int, h: int, b_exp: float
) -> float:
    """As :func:`sample_peflopacf` but with raw psi entries in the system.

    For a causal PAR(p) model this variant satisfies zeta_v(p) = phi_p(v).
    """
    fp = FlocParams(1.0, b_exp)
    T = series.period

    def psi(vv, hh):
        return sample_pefloacvf(series, _wrap_season(vv, T), hh, fp)

    return _last_from_cache(psi, v, h)


def _last_from_cache(value, v: int, h: int) -> float:
    if h < 1:
        raise ValueError("peFLOPACF is defined for lags h >= 1")
    mat = np.empty((h, h))
    for i in range(1, h + 1):
        for j in range(1, h + 1):
            mat[i - 1, j - 1] = value(v - j, i - j)
    rhs = np.array([value(v, i) for i in range(1, h + 1)])
    return _solve_last(mat, rhs, v, h)


def pefloacf_table(series: PeriodicSeries, fp: FlocParams, lags, seasons=None):
    """eta_v(h) for every requested season and lag, sharing one lag-0 pass."""
    seasons = range(1, series.period + 1) if seasons is None else seasons
    lags = list(lags)
    values = _measure_values(series, "pefloacf", lags, fp, seasons)
    return SeasonalLagTable(series.period, lags, values, meta=fp)


def peflopacf_table(series: PeriodicSeries, b_exp: float, lags, seasons=None):
    """zeta_v(h) for every requested season and lag >= 1 (A = 1 throughout)."""
    seasons = range(1, series.period + 1) if seasons is None else seasons
    lags = list(lags)
    fp = FlocParams(1.0, b_exp)
    values = _measure_values(series, "peflopacf", lags, fp, seasons)
    return SeasonalLagTable(series.period, lags, values, meta=fp)


# ---------------------------------------------------------------------------
# Tables and Monte Carlo machinery


@dataclass
class SeasonalLagTable:
    """Values of a periodic measure indexed by season v and lag h."""

    period: int
    lags: list[int]
    values: dict[tuple[int, int], float]
    meta: FlocParams | None = None

    def value(self, v: int, h: int) -> float:
        return self.values[(v, h)]

    def to_csv(self, path):
        with open(path, "w") as f:
            f.write("v,h,value\n")
            for (v, h), val in sorted(self.values.items()):
                f.write(f"{v},{h},{FMT % val}\n")

    @classmethod
    def from_csv(cls, path, period: int | None = None):
        values = {}
        with open(path) as f:
            header = f.readline()
            if header.strip() != "v,h,value":
                raise ValueError(f"unexpected header {header!r}")
            for line in f:
                v, h, val = line.strip().split(",")
                values[(int(v), int(h))] = float(val)
        seasons = {v for v, _ in values}
        lags = sorted({h for _, h in values})
        return cls(period or max(seasons), lags, values)

    def to_json(self, path):
        payload = {
            "period": self.period,
            "lags": self.lags,
            "entries": [[v, h, FMT % val] for (v, h), val in sorted(self.values.items())],
        }
        with open(path, "w") as f:
            json.dump(payload, f)

    @classmethod
    def from_json(cls, path):
        with open(path) as f:
            payload = json.load(f)
        values = {(int(v), int(h)): float(val) for v, h, val in payload["entries"]}
        return cls(int(payload["period"]), [int(h) for h in payload["lags"]], values)


@dataclass
class NullBands:
    """Per-lag empirical confidence bands of a measure under the i.i.d. null."""

    level: float
    m: int
    alpha: float
    nt: int
    period: int
    lower: dict[int, float]
    upper: dict[int, float]

    def contains(self, h: int, value: float) -> bool:
        return self.lower[h] < value < self.upper[h]

    def to_csv(self, path):
        with open(path, "w") as f:
            f.write("h,lower,upper\n")
            for h in sorted(self.lower):
                f.write(f"{h},{FMT % self.lower[h]},{FMT % self.upper[h]}\n")


def _measure_values(series, measure: str, lags, fp: FlocParams, seasons):
    """Evaluate one measure on one series for the given seasons and lags."""
    out = {}
    if measure == "pefloacf":
        cache = _EtaCache(series, fp)
        for v in seasons:
            for h in lags:
                out[(v, h)] = cache.eta(v, h)
    elif measure == "peflopacf":
        cache = _EtaCache(series, FlocParams(1.0, fp.b_exp))
        for v in seasons:
            for h in lags:
                out[(v, h)] = _last_from_cache(cache.eta, v, h)
    else:
        raise ValueError(f"unknown measure {measure!r}")
    return out


def mc_average_table(
    model: PeriodicModel,
    measure: str,
    lags,
    fp: FlocParams,
    n_traj: int,
    nt: int,
    seed: int,
) -> SeasonalLagTable:
    """Element-wise mean of a sample measure over independent trajectories.

    Trajectory i uses substream i of ``seed``.  Trajectories on which the
    measure fails (singular partial systems, degenerate seasons) are dropped
    and counted; more than 5% drops raises a calibration warning.
    """
    if n_traj < 1:
        raise ValueError("n_traj must be >= 1")
    T = model.period
    if nt % T:
        raise ValueError("nt must be a multiple of the period")
    lags = list(lags)
    seasons = range(1, T + 1)
    acc: dict[tuple[int, int], list[float]] = {}
    dropped = 0
    for i in range(n_traj):
        series = gen_parma(model, nt // T, stream(seed, i))
        try:
            vals = _measure_values(series, measure, lags, fp, seasons)
        except (SingularSystemError, DegenerateDataError):
            dropped += 1
            continue
        for key, val in vals.items():
            acc.setdefault(key, []).append(val)
    if dropped > 0.05 * n_traj:
        warnings.warn(
            f"{dropped}/{n_traj} trajectories dropped; averages may be biased"
        )
    values = {key: float(np.mean(vals)) for key, vals in acc.items()}
    return SeasonalLagTable(T, lags, values, meta=fp)


def null_bands(
    measure: str,
    alpha: float,
    nt: int,
    period: int,
    lags,
    fp: FlocParams,
    level: float,
    m: int,
    seed: int,
) -> NullBands:
    """Per-lag two-sided quantile bands of a measure under the i.i.d. null.

    The measure is evaluated at v = 1 on m i.i.d. S(alpha, 1) sequences; the
    resulting bands are reused for every season (the null is
    season-homogeneous).  Quantiles use the linear-interpolation order
    statistic rule.
    """
    if m < 100:
        raise ValueError("m must be >= 100 for usable quantiles")
    if not 0.0 < level < 1.0:
        raise ValueError("confidence level must be in (0, 1)")
    lags = list(lags)
    draws = _null_measure_draws(measure, alpha, nt, period, lags, fp, m, seed)
    tail = (1.0 - level) / 2.0
    lower, upper = {}, {}
    for k, h in enumerate(lags):
        col = draws[:, k]
        col = col[np.isfinite(col)]
        lower[h] = float(np.quantile(col, tail))
        upper[h] = float(np.quantile(col, 1.0 - tail))
    return NullBands(level, m, alpha, nt, period, lower, upper)


def _null_measure_draws(measure, alpha, nt, period, lags, fp, m, seed):
    """(m, len(lags)) array of the measure at v=1 on i.i.d. S(alpha,1) nulls."""
    draws = np.full((m, len(lags)), np.nan)
    for i in range(m):
        series = gen_ipd_stable(period, 1.0, alpha, nt // period, stream(seed, i))
        try:
            vals = _measure_values(series, measure, lags, fp, seasons=(1,))
        except (SingularSystemError, DegenerateDataError):
            continue
        draws[i] = [vals[(1, h)] for h in lags]
    return draws

"""Simulation of cyclostationary processes with alpha-stable innovations.

Covers independent periodically distributed (i.p.d.) noise and periodic
ARMA recursions with seasonal coefficients (PAR / PMA / PARMA).  Seasons are
numbered 1..T; the sample index convention is x_1..x_{NT} with the season of
index t equal to ((t - 1) mod T) + 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NonCausalModelError, ShapeError
from .stable import StableParams, sample_sym_stable

__all__ = [
    "PeriodicModel",
    "PeriodicSeries",
    "gen_ipd_stable",
    "gen_parma",
    "local_orders",
    "monodromy_spectral_radius",
]

_CAUSALITY_MARGIN = 1e-9


@dataclass(frozen=True)
class PeriodicSeries:
    """A sample x_1..x_{NT} of a period-T process, holding whole cycles."""

    values: np.ndarray
    period: int

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if self.period < 1:
            raise ValueError("period must be >= 1")
        if vals.ndim != 1 or vals.size == 0 or vals.size % self.period != 0:
            raise ShapeError(
                f"series length {vals.size} is not a positive multiple of period {self.period}"
            )

    @property
    def n_cycles(self) -> int:
        return self.values.size // self.period

    def __len__(self) -> int:
        return self.values.size

    def season_of(self, t: int) -> int:
        """Season of the 1-based sample index t."""
        return (t - 1) % self.period + 1

    def scaled(self, factor: float) -> "PeriodicSeries":
        return PeriodicSeries(self.values * factor, self.period)


@dataclass(frozen=True)
class PeriodicModel:
    """A PARMA model: period T plus seasonal AR/MA coefficient arrays.

    ``ar_coeffs`` has shape (T, p) with entry (v-1, i-1) the AR coefficient
    of lag i in season v; ``ma_coeffs`` is (T, q) likewise.  Either may be
    empty (pure PMA, pure PAR, or pure noise).  Innovations are symmetric
    alpha-stable with a scalar or per-season scale.
    """

    period: int
    ar_coeffs: np.ndarray
    ma_coeffs: np.ndarray
    alpha: float = 1.7
    scales: np.ndarray = field(default=None)

    def __post_init__(self):
        T = self.period
        if T < 1:
            raise ValueError("period must be >= 1")
        ar = np.atleast_2d(np.asarray(self.ar_coeffs, dtype=float))
        ma = np.atleast_2d(np.asarray(self.ma_coeffs, dtype=float))
        if ar.size == 0:
            ar = ar.reshape(T, 0)
        if ma.size == 0:
            ma = ma.reshape(T, 0)
        if ar.shape[0] != T or ma.shape[0] != T:
            raise ShapeError("coefficient arrays must have exactly T rows")
        scales = self.scales
        if scales is None:
            scales = np.ones(T)
        scales = np.broadcast_to(np.asarray(scales, dtype=float), (T,)).copy()
        if not np.all(scales > 0):
            raise ValueError("innovation scales must be positive")
        if not 0.0 < self.alpha <= 2.0:
            raise ValueError("alpha must be in (0, 2]")
        object.__setattr__(self, "ar_coeffs", ar)
        object.__setattr__(self, "ma_coeffs", ma)
        object.__setattr__(self, "scales", scales)

    @property
    def p(self) -> int:
        return self.ar_coeffs.shape[1]

    @property
    def q(self) -> int:
        return self.ma_coeffs.shape[1]

    def is_causal(self) -> bool:
        if self.p == 0:
            return True
        return monodromy_spectral_radius(self.ar_coeffs) < 1.0 - _CAUSALITY_MARGIN

    @classmethod
    def par(cls, phi_by_season, alpha: float = 1.7, scales=None) -> "PeriodicModel":
        """Pure periodic AR model; ``phi_by_season`` is the (T, p) array."""
        phi = np.atleast_2d(np.asarray(phi_by_season, dtype=float))
        if phi.ndim == 2 and phi.shape[1] == 0:
            raise ShapeError("use full constructor for an AR-free model")
        if np.asarray(phi_by_season).ndim == 1:
            phi = np.asarray(phi_by_season, dtype=float).reshape(-1, 1)
        T = phi.shape[0]
        return cls(T, phi, np.empty((T, 0)), alpha=alpha, scales=scales)

    @classmethod
    def pma(cls, theta_by_season, alpha: float = 1.7, scales=None) -> "PeriodicModel":
        """Pure periodic MA model; ``theta_by_season`` is the (T, q) array."""
        theta = np.atleast_2d(np.asarray(theta_by_season, dtype=float))
        if np.asarray(theta_by_season).ndim == 1:
            theta = np.asarray(theta_by_season, dtype=float).reshape(-1, 1)
        T = theta.shape[0]
        return cls(T, np.empty((T, 0)), theta, alpha=alpha, scales=scales)


def monodromy_spectral_radius(ar_coeffs: np.ndarray) -> float:
    """Spectral radius of the cycle product of per-season companion matrices.

    A value below 1 is the stability criterion for the periodic AR part.
    """
    ar = np.atleast_2d(np.asarray(ar_coeffs, dtype=float))
    T, p = ar.shape
    if p == 0:
        return 0.0
    m = np.eye(p)
    for v in range(T):
        comp = np.zeros((p, p))
        comp[0, :] = ar[v]
        if p > 1:
            comp[1:, :-1] = np.eye(p - 1)
        m = comp @ m
    return float(np.max(np.abs(np.linalg.eigvals(m))))


def local_orders(model: PeriodicModel):
    """Seasonal orders p(v), q(v) and the global orders (p, q).

    p(v) is the largest lag i with a nonzero AR coefficient in season v (0 if
    none); q(v) likewise for the MA part.  Returns (p_seasonal, q_seasonal,
    p, q) with the seasonal arrays indexed by v - 1.
    """
    def seasonal(coeffs):
        T, order = coeffs.shape
        out = np.zeros(T, dtype=int)
        for v in range(T):
            nz = np.nonzero(coeffs[v] != 0.0)[0]
            out[v] = int(nz[-1]) + 1 if nz.size else 0
        return out

    p_seasonal = seasonal(model.ar_coeffs)
    q_seasonal = seasonal(model.ma_coeffs)
    return p_seasonal, q_seasonal, int(p_seasonal.max(initial=0)), int(q_seasonal.max(initial=0))


def gen_ipd_stable(
    period: int, scales, alpha: float, n_cycles: int, rng: np.random.Generator
) -> PeriodicSeries:
    """Independent periodically distributed alpha-stable noise.

    Entry at season v is S(alpha, sigma(v)); all entries independent.  This
    is the canonical periodic fractional lower-order white noise.
    """
    scales = np.broadcast_to(np.asarray(scales, dtype=float), (period,))
    if not np.all(scales > 0):
        raise ValueError("scales must be positive")
    n = n_cycles * period
    z = sample_sym_stable(StableParams(alpha, 1.0), n, rng)
    z *= np.tile(scales, n_cycles)
    return PeriodicSeries(z, period)


def default_burn_in(model: PeriodicModel) -> int:
    """Burn-in length in cycles: covers 50 T + 10 (p + q) samples."""
    samples = 50 * model.period + 10 * (model.p + model.q)
    return math.ceil(samples / model.period)


def gen_parma(
    model: PeriodicModel,
    n_cycles: int,
    rng: np.random.Generator,
    burn_in: int | None = None,
    innovation_sampler=None,
    return_innovations: bool = False,
):
    """Simulate a PARMA trajectory of n_cycles full periods.

    The recursion X_t = sum_i phi_i(t) X_{t-i} + xi_t + sum_j theta_j(t)
    xi_{t-j} is run from zero initial state for ``burn_in`` extra cycles
    (default covers the initialization transient) which are then discarded.
    ``innovation_sampler(n, rng)`` may replace the stable innovations; it
    must return unit-scale draws which are then scaled per season.
    """
    if not model.is_causal():
        raise NonCausalModelError(
            "periodic AR part has monodromy spectral radius >= 1; refusing to simulate"
        )
    T, p, q = model.period, model.p, model.q
    burn = default_burn_in(model) if burn_in is None else int(burn_in)
    total = (burn + n_cycles) * T

    if innovation_sampler is None:
        draws = sample_sym_stable(StableParams(model.alpha, 1.0), total + q, rng)
    else:
        draws = np.asarray(innovation_sampler(total + q, rng), dtype=float)
    # xi_t for t = 1-q .. total lives at draws[t - 1 + q]; season scaling
    t_idx = np.arange(1 - q, total + 1)
    xi = draws * model.scales[(t_idx - 1) % T]

    # MA contribution is a finite convolution; vectorized over t
    rhs = xi[q:].copy()
    seasons = np.arange(total) % T
    for j in range(1, q + 1):
        rhs += model.ma_coeffs[seasons, j - 1] * xi[q - j : q - j + total]

    if p == 0:
        x = rhs
    else:
        x = np.zeros(total)
        ar = model.ar_coeffs
        for t in range(total):
            acc = rhs[t]
            row = ar[t % T]
            for i in range(1, min(p, t) + 1):
                acc += row[i - 1] * x[t - i]
            x[t] = acc

    series = PeriodicSeries(x[burn * T :], T)
    if return_innovations:
        # innovations[q + k] is the innovation of kept sample k (0-based);
        # the q leading entries are the pre-sample history the MA part used
        return series, xi[burn * T :]
    return series

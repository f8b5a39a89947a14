"""End-to-end statistical acceptance checks.

Each test covers one numbered criterion, prints a single pass/fail line
(bypassing capture so the line shows up in any pytest run), and then
asserts.  The Monte Carlo checks use fixed seeds and tolerances wide
enough to absorb replication noise at the stated sample sizes; calibration
draws are cached on disk, so repeated runs skip the expensive parts.
"""

import numpy as np
import pytest

from pefloc import (
    CalibrationCache,
    FlocParams,
    InsufficientDataError,
    PeriodicModel,
    PeriodicSeries,
    StableParams,
    calibration_kappa_sample,
    fit_par_yw,
    gen_ipd_stable,
    gen_parma,
    identify_par_order,
    identify_pma_order,
    kappa_stats,
    mc_average_table,
    pefloacf_table,
    peflopacf_table,
    portmanteau_test,
    residual_series,
    sample_pefloacf,
    sample_pefloacvf,
    sample_sym_stable,
    stream,
)
from pefloc.inference import _cached_bands

from oracles import brute_pefloacvf, classical_peacf, classical_peacvf, empirical_cf

MODEL2 = PeriodicModel.par(np.array([[0.8], [-0.3]]), alpha=1.7)
MODEL3 = PeriodicModel.pma(np.array([[0.8], [-0.3]]), alpha=1.7)
FP88 = FlocParams(0.8, 0.8)
CACHE = CalibrationCache()


def report(capsys, num, name, ok, detail):
    with capsys.disabled():
        print(f"[{'PASS' if ok else 'FAIL'}] criterion {num:>2} ({name}): {detail}")
    assert ok, f"criterion {num} ({name}): {detail}"


def test_01_classical_reduction(capsys):
    rng = stream(101)
    fp = FlocParams(1.0, 1.0)
    worst = 0.0
    for _ in range(20):
        T = int(rng.integers(1, 6))
        n = int(rng.integers(3, 400 // T + 1))
        x = rng.normal(size=n * T)
        series = PeriodicSeries(x, T)
        for v in range(1, T + 1):
            for h in range(-5, 6):
                got = sample_pefloacvf(series, v, h, fp)
                ref = classical_peacvf(x, T, v, h)
                worst = max(worst, abs(got - ref) / max(abs(ref), 1e-300))
                got = sample_pefloacf(series, v, h, fp)
                ref = classical_peacf(x, T, v, h)
                worst = max(worst, abs(got - ref) / max(abs(ref), 1e-300))
    report(capsys, 1, "classical reduction", worst <= 1e-12,
           f"max relative deviation {worst:.3g} (tol 1e-12)")


def test_02_brute_force_acvf(capsys):
    rng = stream(102)
    fp = FlocParams(0.7, 0.9)
    checked = 0
    for T in range(1, 6):
        for n in range(1, 40 // T + 1):
            x = rng.standard_t(df=2, size=n * T)
            series = PeriodicSeries(x, T)
            for v in range(1, T + 1):
                for h in range(-10, 11):
                    ref = brute_pefloacvf(x, T, v, h, fp.a_exp, fp.b_exp)
                    if ref is None:
                        with pytest.raises(InsufficientDataError):
                            sample_pefloacvf(series, v, h, fp)
                    else:
                        assert sample_pefloacvf(series, v, h, fp) == ref
                    checked += 1
    report(capsys, 2, "brute-force estimator", True,
           f"{checked} (series, season, lag) cases match exactly")


def test_03_test_size(capsys):
    calib = calibration_kappa_sample(1.7, 1000, 2, FP88, 3, 2000, 103, CACHE)
    rejects = 0
    for rep in range(500):
        series = gen_ipd_stable(2, [1.0, 1.0], 1.7, 500, stream(203, rep))
        res = portmanteau_test(series, 1.7, FP88, 3, 0.05, calibration=calib)
        rejects += res.reject_any
    rate = rejects / 500
    report(capsys, 3, "test size", 0.02 <= rate <= 0.08,
           f"empirical size {rate:.3f} over 500 null replications (target [0.02, 0.08])")


def test_04_par_power(capsys):
    calib = calibration_kappa_sample(1.7, 1000, 2, FP88, 3, 2000, 103, CACHE)
    model = PeriodicModel.par(np.array([[0.5], [0.5]]), alpha=1.7)
    rejects = 0
    for rep in range(200):
        series = gen_parma(model, 500, stream(204, rep))
        res = portmanteau_test(series, 1.7, FP88, 3, 0.05, calibration=calib)
        rejects += res.reject_any
    power = rejects / 200
    report(capsys, 4, "periodic AR power", power >= 0.99,
           f"total power {power:.3f} over 200 replications (target >= 0.99)")


def test_05_pma_power(capsys):
    calib = calibration_kappa_sample(1.7, 100, 2, FP88, 3, 2000, 105, CACHE)
    model = PeriodicModel.pma(np.array([[0.9], [-0.9]]), alpha=1.7)
    rejects = 0
    for rep in range(200):
        series = gen_parma(model, 50, stream(205, rep))
        res = portmanteau_test(series, 1.7, FP88, 3, 0.05, calibration=calib)
        rejects += res.reject_any
    power = rejects / 200
    report(capsys, 5, "periodic MA power", power >= 0.95,
           f"total power {power:.3f} over 200 replications (target >= 0.95)")


def test_06_par_order_identification(capsys):
    bands = _cached_bands("peflopacf", 1.7, 1000, 2, list(range(1, 6)),
                          FlocParams(1.0, 0.6), 0.99, 2000, 106, CACHE)
    model = PeriodicModel.par(np.array([[0.9], [-0.9]]), alpha=1.7)
    correct = 0
    for rep in range(200):
        series = gen_parma(model, 500, stream(206, rep))
        res = identify_par_order(series, 1.7, 0.6, 5, bands=bands)
        correct += bool(np.all(res.seasonal == 1))
    rate = correct / 200
    report(capsys, 6, "AR order selection", rate >= 0.90,
           f"both-seasons-correct rate {rate:.3f} over 200 replications (target >= 0.90)")


def test_07_pma_order_identification(capsys):
    lags = [h for h in range(-5, 6) if h != 0]
    bands = _cached_bands("pefloacf", 1.7, 1000, 2, lags, FP88, 0.99, 2000, 107, CACHE)
    model = PeriodicModel.pma(np.array([[0.9], [0.9]]), alpha=1.7)
    correct = 0
    for rep in range(200):
        series = gen_parma(model, 500, stream(207, rep))
        res = identify_pma_order(series, 1.7, FP88, 5, bands=bands)
        correct += bool(np.all(res.seasonal == 1))
    rate = correct / 200
    report(capsys, 7, "MA order selection", rate >= 0.90,
           f"both-seasons-correct rate {rate:.3f} over 200 replications (target >= 0.90)")


def test_08_cutoff_invariants(capsys):
    eta_lags = [h for h in range(-10, 11) if abs(h) > 1]
    eta = mc_average_table(MODEL3, "pefloacf", eta_lags, FP88, 1000, 1000, 108)
    eta_max = max(abs(val) for val in eta.values.values())
    zeta = mc_average_table(MODEL2, "peflopacf", list(range(2, 11)),
                            FlocParams(1.0, 0.6), 1000, 1000, 308)
    zeta_max = max(abs(val) for val in zeta.values.values())
    ok = eta_max <= 0.02 and zeta_max <= 0.02
    report(capsys, 8, "cut-off beyond model order", ok,
           f"max mean |eta| {eta_max:.4f}, max mean |zeta| {zeta_max:.4f} (tol 0.02)")


def test_09_yule_walker_consistency(capsys):
    coeffs = np.zeros((50, 2))
    for rep in range(50):
        series = gen_parma(MODEL2, 5000, stream(209, rep))
        fit = fit_par_yw(series, [1, 1], 0.6)
        coeffs[rep] = [fit.coeff(1, 1), fit.coeff(2, 1)]
    m1, m2 = coeffs.mean(axis=0)
    ok = abs(m1 - 0.8) <= 0.05 and abs(m2 + 0.3) <= 0.05
    report(capsys, 9, "Yule-Walker consistency", ok,
           f"mean estimates ({m1:.4f}, {m2:.4f}) vs (0.8, -0.3), tol 0.05")


def test_10_stable_sampler_cf(capsys):
    worst = 0.0
    for i, alpha in enumerate([1.2, 1.7, 1.9, 2.0]):
        x = sample_sym_stable(StableParams(alpha, 1.0), 100_000, stream(210, i))
        for s in (0.25, 0.5, 1.0, 2.0):
            got, se = empirical_cf(x, s)
            worst = max(worst, abs(got - np.exp(-abs(s) ** alpha)) / se)
    report(capsys, 10, "stable sampler", worst <= 4.0,
           f"characteristic function off by at most {worst:.2f} standard errors (tol 4)")


def test_11_scale_invariance(capsys):
    series = gen_parma(MODEL2, 300, stream(211))
    lags = [h for h in range(-3, 4) if h != 0]
    worst = 0.0

    def stats(s):
        eta = pefloacf_table(s, FP88, lags)
        zeta = peflopacf_table(s, 0.6, range(1, 4))
        kappa = kappa_stats(s, FP88, 3)
        return np.concatenate([
            [eta.values[k] for k in sorted(eta.values)],
            [zeta.values[k] for k in sorted(zeta.values)],
            kappa,
        ])

    base = stats(series)
    for factor in (7.3, -1.0):
        other = stats(series.scaled(factor))
        worst = max(worst, float(np.max(np.abs(other - base) / np.abs(base))))
    report(capsys, 11, "scale invariance", worst <= 1e-12,
           f"max relative change under rescaling {worst:.3g} (tol 1e-12)")


def test_12_end_to_end_fit(capsys):
    # Single demonstration run: identify, fit, residual diagnostics.
    bands = _cached_bands("peflopacf", 1.7, 1000, 2, list(range(1, 6)),
                          FlocParams(1.0, 0.6), 0.99, 2000, 106, CACHE)
    series = gen_parma(MODEL2, 500, stream(212))
    order = identify_par_order(series, 1.7, 0.6, 5, bands=bands)
    fit = fit_par_yw(series, order.seasonal, 0.6)
    res = residual_series(series, fit)
    assert np.all(order.seasonal == 1)

    # The residual test must not over-reject when the fitted model class is
    # the true one.  Parameter estimation whitens the residuals slightly, so
    # the rate may fall a little below the nominal level; only an excess
    # would indicate a broken pipeline.
    calib = calibration_kappa_sample(1.7, len(res), 2, FP88, 3, 2000, 112, CACHE)
    rejects = 0
    for rep in range(500):
        s = gen_parma(MODEL2, 500, stream(312, rep))
        f = fit_par_yw(s, [1, 1], 0.6)
        r = residual_series(s, f)
        diag = portmanteau_test(r, 1.7, FP88, 3, 0.05, calibration=calib)
        rejects += diag.reject_any
    rate = rejects / 500
    report(capsys, 12, "end-to-end fit", rate <= 0.08,
           f"orders {order.seasonal.tolist()}, residual rejection rate {rate:.3f} "
           f"(target <= 0.08)")

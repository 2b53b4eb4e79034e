"""Acceptance criteria, one test per criterion.

Each test prints a single ``PASS``/``FAIL criterion N: ...`` line to the
terminal (bypassing capture) before asserting, so ``pytest -v`` shows the
measured figures next to the verdict.
"""

import math
import time
import warnings
from dataclasses import replace

import numpy as np
import pytest
from scipy.optimize import brentq

from dpasim.circuit import DpaParams, DriveCondition, FilmDevice, biased_resonance, derive_dpa_params, kerr_constant
from dpasim.config import load_config
from dpasim.errors import ComplexKappaWarning
from dpasim.fitting import calibrate_conversion, calibration_traces, fit_gain_spectrum, fit_istar, fit_noise_asymptote
from dpasim.iotheory import (
    commutation_residual,
    gain_bandwidth_product,
    is_above_threshold,
    pump_power_for,
    reflection_gain,
    reflection_spectrum,
    signal_idler_gains,
    threshold_pump_power,
)
from dpasim.noisechain import input_referred_noise, snr_improvement
from dpasim.squeezing import (
    ReflectionModel,
    anti_squeezing_level,
    observed_gains,
    transform_matrix,
    vacuum_squeezing_level,
)
from dpasim.traces import Trace, read_noise_sweep_csv
from dpasim.units import db_to_power_ratio

from conftest import EX, PAPER_JSON, TWO_PI, mhz, random_below_threshold, synthetic_sweep


@pytest.fixture
def report(capsys):
    def _report(n, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
        assert ok, detail

    return _report


@pytest.fixture(scope="module")
def cfg():
    return load_config(PAPER_JSON)


def film_at_7p2():
    return FilmDevice(l_total=3.84e-9, i_star=5.10e-3, omega0=TWO_PI * 7.2e9, z0=118.0, q_internal=1e5)


def test_criterion_1_kerr(report):
    k_hz = abs(kerr_constant(film_at_7p2())) / TWO_PI
    report(1, abs(k_hz / 0.13 - 1) <= 0.05, f"|K|/2pi = {k_hz:.5f} Hz (target 0.13 Hz +/- 5%)")


def test_criterion_2_bias_tuning(report):
    dev = film_at_7p2()
    shift = (dev.omega0 - biased_resonance(dev, 0.9e-3)) / TWO_PI / 1e6
    report(2, 95 <= shift <= 120, f"shift at 0.9 mA = {shift:.2f} MHz (target [95, 120] MHz)")


def test_criterion_3_threshold(report, cfg):
    p_fix = threshold_pump_power(cfg.device, cfg.drive, cfg.kappa_function, bracket=cfg.threshold_bracket)

    lossless = replace(cfg.device, q_internal=1e12)
    kappa = mhz(53.0)
    p_cf = pump_power_for(
        lambda prm: is_above_threshold(prm.replace(delta=0.0)), 0.0, lossless, cfg.drive, lambda p: kappa, (0.0, 6.0)
    )
    # Inversion oracle: at threshold with Delta = 0 and gamma = 0, |xi| = kappa/2.
    i_p = 4 * (kappa / 2) * lossless.i_star ** 2 / (cfg.drive.i_dc * lossless.omega0)
    p_oracle = 10 * math.log10(i_p ** 2 * lossless.z0 / 2 / db_to_power_ratio(-cfg.drive.lambda_p_db)) + 30
    ok = abs(p_fix - 4.22) <= 0.5 and abs(p_cf - 3.8) <= 0.3 and abs(p_cf - p_oracle) < 1e-6
    report(
        3, ok,
        f"fixture threshold {p_fix:.3f} dBm (4.22 +/- 0.5); zero-detuning {p_cf:.3f} dBm vs oracle {p_oracle:.3f} (3.8 +/- 0.3)",
    )


def test_criterion_4_gbp(report, cfg):
    kt = cfg.kappa_table
    centre = cfg.drive.omega_p / (2 * TWO_PI)
    freq = centre + np.linspace(-300e6, 300e6, 6001)
    peaks, gbps = [], []
    for p in np.linspace(-1.5, 3.98, 60):
        prm = derive_dpa_params(cfg.device, replace(cfg.drive, p_pump_dbm=p), kappa=kt(p).real)
        gb = gain_bandwidth_product(reflection_spectrum(prm, freq, cfg.drive.omega_p))
        if 10 <= gb.peak_gain_db <= 40:
            peaks.append(gb.peak_gain_db)
            gbps.append(gb.gbp_hz / 1e6)
    gbps = np.array(gbps)
    mean = gbps.mean()
    spread = np.max(np.abs(gbps / mean - 1))
    ok = len(gbps) >= 10 and spread <= 0.15 and abs(mean - 53) <= 7
    report(
        4, ok,
        f"{len(gbps)} spectra, peaks {min(peaks):.1f}-{max(peaks):.1f} dB, mean GBP {mean:.2f} MHz, max deviation {100 * spread:.1f}%",
    )


def test_criterion_5_squeezing_asymmetry(report, cfg):
    refl = ReflectionModel(0.02, 0.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ComplexKappaWarning)
        p = pump_power_for(
            lambda prm: observed_gains(prm, refl).g_a_db, 30.0, cfg.device, cfg.drive, cfg.kappa_table, (0.0, 3.98)
        )
        prm = derive_dpa_params(cfg.device, replace(cfg.drive, p_pump_dbm=p), kappa=cfg.kappa_table(p))
        g = observed_gains(prm, refl)
    report(5, abs(g.g_a_db - 30) < 1e-3 and 24 <= g.g_s_db <= 28, f"at {p:.3f} dBm: G_A = {g.g_a_db:.2f} dB, G_S = {g.g_s_db:.2f} dB (target [24, 28])")


def _squeezing_at(q_i, anti_db):
    base = DpaParams(kappa=mhz(53.0) + 0j, gamma=TWO_PI * 7.19e9 / q_i, delta=0.0)
    kb = base.kappa_bar.real
    x = brentq(lambda x: anti_squeezing_level(base.with_xi(x * kb)) - anti_db, 0.5, 1 - 1e-12, xtol=1e-15)
    return vacuum_squeezing_level(base.with_xi(x * kb))


def test_criterion_6_vacuum_squeezing(report):
    s_40 = _squeezing_at(1e5, 40.0)
    plateau = [_squeezing_at(q, 60.0) for q in (1e4, 1e5, 1e6)]
    steps = -np.diff(plateau)
    ok = abs(s_40 + 29) <= 1.5 and np.all(np.abs(steps - 10) <= 2)
    report(
        6, ok,
        f"S_v(Q_i=1e5, 40 dB anti) = {s_40:.2f} dB; plateau {', '.join(f'{v:.2f}' for v in plateau)} dB, steps {', '.join(f'{v:.2f}' for v in steps)} dB",
    )


def test_criterion_7_noise_budget(report):
    n_sys, n_th, n_k, g_t = 80.0, 0.06, 0.06, 2.8e6
    off = input_referred_noise(None, 1.0, 1.0, "off", n_th=n_th, n_sys=n_sys, g_t=g_t)
    nd = input_referred_noise(None, 1.0, db_to_power_ratio(24.5), "non-degenerate", n_th=n_th, n_k=n_k, n_sys=n_sys)
    dg = input_referred_noise(None, 1.0, db_to_power_ratio(31.0), "degenerate", n_th=n_th, n_k=n_k, n_sys=n_sys)
    dg35 = input_referred_noise(None, 1.0, db_to_power_ratio(35.0), "degenerate", n_th=n_th, n_k=n_k, n_sys=n_sys)
    snr = snr_improvement(off, nd)
    adv = snr_improvement(nd, dg)
    ok = abs(snr - 18) <= 1 and abs(adv - 6) <= 1 and abs(dg35.n_td - 0.32) <= 0.03
    report(7, ok, f"SNR over off {snr:.2f} dB (18 +/- 1); degenerate advantage {adv:.2f} dB (6 +/- 1); n_td(35 dB) = {dg35.n_td:.3f} (0.32 +/- 0.03)")


def test_criterion_8_calibration(report):
    rows, f = synthetic_sweep()
    clean = calibrate_conversion(*calibration_traces(**rows, frequency=f)).values["z_g_t"]
    noisy_err = []
    for seed in range(50):
        rows, f = synthetic_sweep(noise=0.02, seed=seed)
        z = calibrate_conversion(*calibration_traces(**rows, frequency=f)).values["z_g_t"]
        noisy_err.append(abs(z / 93.2e-15 - 1))
    fixture_rows = read_noise_sweep_csv(EX / "calibration_sweep.csv")
    fixture = calibrate_conversion(*calibration_traces(**fixture_rows, frequency=7.1905e9)).values["z_g_t"]
    e_clean, e_noisy = abs(clean / 93.2e-15 - 1), float(np.percentile(noisy_err, 95))
    ok = e_clean <= 0.01 and e_noisy <= 0.05 and abs(fixture - 93.2e-15) <= 1.0e-15
    report(
        8, ok,
        f"noiseless error {100 * e_clean:.3g}%, 2% noise error {100 * e_noisy:.2f}% (95th pct of 50 seeds, worst {100 * max(noisy_err):.2f}%), fixture {fixture * 1e15:.2f} fW/photon (93.2 +/- 1.0)",
    )


def _fit_round_trips(rng):
    """Worst residual_rms over the noiseless gain, I_*, asymptote and calibration fits."""
    dev = FilmDevice(l_total=3.84e-9, i_star=5.10e-3, omega0=TWO_PI * 7.289872e9, z0=118.0, q_internal=1e5)
    drv = DriveCondition(i_dc=0.834e-3, p_pump_dbm=3.0, lambda_p_db=22.8, omega_p=TWO_PI * 14.381e9)
    worst = 0.0
    for _ in range(5):
        kappa_hz, arg, lam = rng.uniform(50e6, 56e6), rng.uniform(0.0, 0.05), rng.uniform(22.5, 24.0)
        prm = derive_dpa_params(dev, replace(drv, lambda_p_db=lam), kappa=TWO_PI * kappa_hz * np.exp(1j * arg))
        f = drv.omega_p / (2 * TWO_PI) + np.linspace(-200e6, 200e6, 801)
        y = 20 * np.log10(np.abs(reflection_gain(prm, TWO_PI * f, drv.omega_p)))
        worst = max(worst, fit_gain_spectrum(Trace(f, y), dev, drv).residual_rms)

        bias = np.linspace(0, 0.9e-3, 10)
        i_star = rng.uniform(3e-3, 8e-3)
        w0 = TWO_PI * rng.uniform(6e9, 8e9)
        worst = max(worst, fit_istar(bias, w0 * (1 - bias ** 2 / (2 * i_star ** 2)) / TWO_PI).residual_rms)

        g = np.logspace(1, 4, 8)
        worst = max(worst, fit_noise_asymptote(Trace(g, rng.uniform(0.25, 2) + rng.uniform(0, 200) / g)).residual_rms)

    rows, freq = synthetic_sweep()
    worst = max(worst, calibrate_conversion(*calibration_traces(**rows, frequency=freq)).residual_rms)
    return worst


def test_criterion_9_property_suite(report, rng):
    t0 = time.perf_counter()

    comm = 0.0
    for p in random_below_threshold(rng, 10_000):
        w = mhz(rng.uniform(-100, 100))
        comm = max(comm, float(commutation_residual(p, signal_idler_gains(p, w))))

    phases = np.linspace(0, TWO_PI, 360, endpoint=False)
    det_err = sv_err = 0.0
    for p in random_below_threshold(rng, 1_000, lossless=True):
        ref = transform_matrix(p, 0.0).singular_values
        for phi in phases:
            t = transform_matrix(p, phi)
            det_err = max(det_err, abs(t.det - 1.0))
            sv_err = max(sv_err, float(np.max(np.abs(t.singular_values / ref - 1))))

    ga_gs = 0.0
    for p in random_below_threshold(rng, 200, lossless=True, detuned=False):
        g = observed_gains(p)
        ga_gs = max(ga_gs, abs(g.g_a_db - g.g_s_db))

    fits = _fit_round_trips(rng)
    elapsed = time.perf_counter() - t0
    ok = comm < 1e-12 and det_err < 1e-10 and sv_err < 1e-10 and ga_gs < 1e-9 and fits < 1e-9 and elapsed < 60
    report(
        9, ok,
        f"commutation {comm:.2e}, |det-1| {det_err:.2e}, singular values {sv_err:.2e}, "
        f"|G_A-G_S| {ga_gs:.2e} dB, fit residual {fits:.2e}, {elapsed:.1f} s",
    )

"""Regenerate the synthetic CSV fixtures next to this script.

Every trace is produced by the package's forward models from the
parameters in ``paper.json`` plus seeded Gaussian noise, so the files are
reproducible bit for bit. They approximate the reference measurements and
are not measured data.

Run with ``python3 ex/make_fixtures.py``.
"""

import json
from pathlib import Path

import numpy as np

from dpasim.config import config_from_dict
from dpasim.noisechain import output_power, thermal_occupation
from dpasim.iotheory import reflection_spectrum
from dpasim.traces import format_csv
from dpasim.units import TWO_PI, db_to_power_ratio

HERE = Path(__file__).resolve().parent
SEED = 20211
COMMENT = "synthetic fixture generated by make_fixtures.py (approximate, not measured)"

# Conversion factor and system noise used for the power fixtures.
Z_G_T = 93.2e-15
N_SYS = 64.2


def _write(name, columns):
    (HERE / name).write_text(format_csv(columns, comments=[COMMENT]))


def calibration_sweep(rng, frequency):
    gains_db = np.array([5.0, 10.0, 15.0, 20.0])
    temps = np.array([0.020, 0.050, 0.100, 0.150, 0.200, 0.250])
    rows = {"temp_k": [], "gain_linear": [], "p_on_w": [], "p_off_w": []}
    for g in db_to_power_ratio(gains_db):
        for t in temps:
            n_th = thermal_occupation(frequency, t)
            p_off = output_power(Z_G_T, 1.0, 1.0, n_th, 0.0, N_SYS, "off")
            p_on = output_power(Z_G_T, 1.0, g, n_th, 0.0, N_SYS, "non-degenerate")
            # 0.3 % noise on the on/off difference, as left after averaging.
            p_on = p_off + (p_on - p_off) * (1.0 + 0.003 * rng.standard_normal())
            rows["temp_k"].append(t)
            rows["gain_linear"].append(g)
            rows["p_on_w"].append(p_on)
            rows["p_off_w"].append(p_off)
    _write("calibration_sweep.csv", rows)


def gain_trace(rng, cfg):
    params = cfg.params()
    centre = cfg.drive.omega_p / (2 * TWO_PI)
    freq = centre + np.linspace(-200e6, 200e6, 801)
    spec = reflection_spectrum(params, freq, cfg.drive.omega_p)
    sigma = np.full(freq.size, 0.05)
    gain = spec.gain_db + sigma * rng.standard_normal(freq.size)
    _write("gain_trace.csv", {"freq_hz": freq, "gain_db": gain, "sigma": sigma})


def istar_sweep(rng, cfg):
    bias = np.linspace(0.0, 0.9e-3, 10)
    f0 = cfg.device.omega0 / TWO_PI
    f = f0 * (1.0 - 0.5 * (bias / cfg.device.i_star) ** 2)
    f = f + 20e3 * rng.standard_normal(bias.size)
    _write("istar_sweep.csv", {"bias_a": bias, "resonance_hz": f})


def compression(rng):
    # Soft saturation g0 - 10 log10(1 + P/P_sat); the 1 dB point sits at
    # P_sat + 10 log10(10**0.1 - 1).
    g0, p_1db = 21.0, -69.5
    p_sat = p_1db - 10 * np.log10(10 ** 0.1 - 1)
    p_in = np.linspace(-100.0, -55.0, 91)
    gain = g0 - 10 * np.log10(1 + 10 ** ((p_in - p_sat) / 10))
    gain = gain + 0.02 * rng.standard_normal(p_in.size)
    _write("compression.csv", {"sigpow_dbm": p_in, "gain_db": gain})


def noise_asymptotes(rng):
    gains = db_to_power_ratio(np.linspace(10.0, 35.0, 11))
    for name, n_inf in (("noise_td.csv", 0.31), ("noise_tn.csv", 1.18)):
        n = n_inf + 80.0 / gains
        n = n * (1.0 + 0.005 * rng.standard_normal(gains.size))
        _write(name, {"gain_linear": gains, "n_t": n})


def main():
    raw = json.loads((HERE / "paper.json").read_text())
    # The sections that point at generated files are not needed here.
    raw.pop("fit", None)
    frequency = raw.pop("calibrate")["frequency_ghz"] * 1e9
    cfg = config_from_dict(raw, HERE)
    rng = np.random.default_rng(SEED)
    calibration_sweep(rng, frequency)
    gain_trace(rng, cfg)
    istar_sweep(rng, cfg)
    compression(rng)
    noise_asymptotes(rng)


if __name__ == "__main__":
    main()

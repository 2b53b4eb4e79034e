"""Shared fixtures and independent oracles for the test suite.

The oracle functions re-derive quantities straight from the closed-form
expressions with plain numpy, so tests do not check the package against
itself.
"""

from pathlib import Path

import numpy as np
import pytest

from dpasim.circuit import DpaParams, DriveCondition, FilmDevice

TWO_PI = 2 * np.pi
EX = Path(__file__).resolve().parents[1] / "ex"
PAPER_JSON = EX / "paper.json"


def mhz(value):
    return TWO_PI * value * 1e6


def oracle_gamma(kappa, gamma, delta, xi_abs, w):
    """Reflection coefficient in the rotating frame, conjugated to lab convention."""
    kb = (kappa + gamma) / 2
    return kappa * (kb + 1j * (delta + w)) / (delta ** 2 + (kb + 1j * w) ** 2 - xi_abs ** 2) - 1


def oracle_phase_gain(kappa, gamma, delta, xi_abs, phi):
    kb = (kappa + gamma) / 2
    den = delta ** 2 + kb ** 2 - xi_abs ** 2
    return np.hypot(kappa * (kb - xi_abs * np.sin(phi)) / den - 1, kappa * (delta + xi_abs * np.cos(phi)) / den)


@pytest.fixture
def paper_device():
    return FilmDevice(l_total=3.84e-9, i_star=5.10e-3, omega0=TWO_PI * 7.289872e9, z0=118.0, q_internal=1e5)


@pytest.fixture
def paper_drive():
    return DriveCondition(i_dc=0.834e-3, p_pump_dbm=3.0, lambda_p_db=22.8, omega_p=TWO_PI * 14.381e9)


@pytest.fixture
def example_params():
    """The 53 MHz / 17.2 MHz lossless resonant example used throughout."""
    return DpaParams(kappa=mhz(53.0) + 0j, gamma=0.0, delta=0.0, xi=mhz(17.2) + 0j)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_below_threshold(rng, n, lossless=False, detuned=True):
    """Draws of DpaParams strictly below the oscillation threshold."""
    out = []
    for _ in range(n):
        kappa = mhz(rng.uniform(5.0, 200.0))
        gamma = 0.0 if lossless else kappa * rng.uniform(0.0, 0.2)
        delta = mhz(rng.uniform(-60.0, 60.0)) if detuned else 0.0
        bound = np.sqrt(delta ** 2 + ((kappa + gamma) / 2) ** 2)
        xi_abs = bound * rng.uniform(0.0, 0.98)
        phase = rng.uniform(0.0, TWO_PI)
        out.append(DpaParams(kappa=kappa + 0j, gamma=gamma, delta=delta, xi=xi_abs * np.exp(-1j * phase)))
    return out


def synthetic_sweep(z_g_t=93.2e-15, n_sys=64.2, gains_db=(5, 10, 15, 20), noise=0.0, seed=0):
    """Calibration rows from the output-power model with optional noise on P_on - P_off."""
    from dpasim.noisechain import output_power, thermal_occupation

    rng = np.random.default_rng(seed)
    f = 7.1905e9
    temps = np.linspace(0.02, 0.5, 20)
    g_t = 2.8e6
    z = z_g_t / g_t
    rows = {"temp_k": [], "gain_linear": [], "p_on_w": [], "p_off_w": []}
    for g_db in gains_db:
        g = 10 ** (g_db / 10)
        for t in temps:
            n_th = thermal_occupation(f, t)
            off = output_power(z, g_t, 1.0, n_th, 0.0, n_sys, "off")
            on = output_power(z, g_t, g, n_th, 0.0, n_sys, "non-degenerate")
            on = off + (on - off) * (1 + noise * rng.standard_normal())
            for k, v in zip(rows, (t, g, on, off)):
                rows[k].append(v)
    return rows, f

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.constants import hbar

from dpasim.circuit import (
    DpaParams,
    DriveCondition,
    FilmDevice,
    biased_resonance,
    derive_dpa_params,
    device_from_record,
    device_to_record,
    drive_from_record,
    drive_to_record,
    kerr_constant,
    kinetic_inductance,
    pump_current,
)
from dpasim.errors import ConfigurationError, DomainError
from dpasim.units import (
    amplitude_to_db,
    attenuation_to_transmittance,
    db_to_amplitude,
    db_to_power_ratio,
    dbm_to_watt,
    hz_to_rad,
    power_ratio_to_db,
    rad_to_hz,
    watt_to_dbm,
)

TWO_PI = 2 * np.pi


def device_72(**kw):
    base = dict(l_total=3.84e-9, i_star=5.10e-3, omega0=TWO_PI * 7.2e9, z0=118.0, q_internal=1e5)
    base.update(kw)
    return FilmDevice(**base)


# -- units -------------------------------------------------------------------


def test_unit_round_trips():
    assert rad_to_hz(hz_to_rad(7.2e9)) == pytest.approx(7.2e9, rel=1e-15)
    assert watt_to_dbm(dbm_to_watt(-12.5)) == pytest.approx(-12.5, abs=1e-12)
    assert power_ratio_to_db(db_to_power_ratio(31.0)) == pytest.approx(31.0, abs=1e-12)
    assert amplitude_to_db(db_to_amplitude(13.4)) == pytest.approx(13.4, abs=1e-12)
    assert dbm_to_watt(0.0) == pytest.approx(1e-3)
    assert attenuation_to_transmittance(np.inf) == 0.0


def test_units_accept_arrays():
    out = dbm_to_watt([0.0, 10.0])
    np.testing.assert_allclose(out, [1e-3, 1e-2])
    assert isinstance(dbm_to_watt(0), float)


# -- kinetic inductance --------------------------------------------------------


def test_kinetic_inductance_examples():
    assert kinetic_inductance(3.84e-9, 0.0, 5.10e-3) == 3.84e-9
    assert kinetic_inductance(2.0e-9, 1e-3, 1e-3) == pytest.approx(4.0e-9, rel=1e-15)
    assert kinetic_inductance(3.84e-9, 0.834e-3, 5.10e-3) == pytest.approx(3.9427e-9, abs=5e-14)


def test_kinetic_inductance_rejects_bad_istar():
    with pytest.raises(DomainError):
        kinetic_inductance(1e-9, 1e-3, 0.0)


@given(st.floats(-1e-2, 1e-2), st.floats(1e-4, 1e-1))
def test_kinetic_inductance_even_and_monotone(i, i_star):
    l = kinetic_inductance(1e-9, i, i_star)
    assert l == kinetic_inductance(1e-9, -i, i_star)
    assert kinetic_inductance(1e-9, abs(i) * 1.1 + 1e-9, i_star) >= l


# -- pump current ----------------------------------------------------------------


def test_pump_current_examples():
    assert pump_current(0.0, 22.8, 118.0) == pytest.approx(2.983e-4, rel=2e-4)
    assert pump_current(5.0, np.inf, 50.0) == 0.0
    assert pump_current(-30.0, 0.0, 50.0) == pytest.approx(2.0e-4, rel=1e-12)


def test_pump_current_needs_positive_impedance():
    with pytest.raises(DomainError):
        pump_current(0.0, 10.0, 0.0)


# -- Kerr constant -------------------------------------------------------------


def test_kerr_constant_magnitude():
    k = kerr_constant(device_72())
    assert k < 0
    oracle = 3 / 8 * hbar * (TWO_PI * 7.2e9) ** 2 / (3.84e-9 * 5.10e-3 ** 2)
    assert -k == pytest.approx(oracle, rel=1e-14)
    assert abs(k) / TWO_PI == pytest.approx(0.12897, rel=1e-4)


def test_kerr_constant_scalings():
    base = kerr_constant(device_72())
    assert kerr_constant(device_72(l_total=7.68e-9)) == pytest.approx(base / 2, rel=1e-14)
    assert abs(kerr_constant(device_72(i_star=1e3))) < 1e-9


@given(st.floats(0.1, 10.0))
def test_kerr_invariant_under_fixed_product(scale):
    a = device_72()
    b = device_72(l_total=a.l_total * scale**2, i_star=a.i_star / scale)
    assert kerr_constant(b) == pytest.approx(kerr_constant(a), rel=1e-12)


# -- bias tuning ---------------------------------------------------------------


def test_biased_resonance_examples():
    dev = device_72()
    shift = (dev.omega0 - biased_resonance(dev, 0.9e-3)) / TWO_PI
    assert shift == pytest.approx(112.1e6, rel=1e-3)
    assert biased_resonance(dev, 0.0) == dev.omega0
    i = dev.i_star * math.sqrt(2) * 0.1
    assert dev.omega0 - biased_resonance(dev, i) == pytest.approx(0.01 * dev.omega0, rel=1e-12)


def test_biased_resonance_rejects_negative_bias():
    with pytest.raises(DomainError):
        biased_resonance(device_72(), -1e-3)


# -- Hamiltonian parameters ----------------------------------------------------


def test_derive_params_examples():
    dev = device_72()
    drive = DriveCondition(i_dc=0.834e-3, p_pump_dbm=0.0, lambda_p_db=22.8, omega_p=TWO_PI * 14.381e9)
    p = derive_dpa_params(dev, drive, kappa=TWO_PI * 53e6)
    assert p.delta_dc / TWO_PI == pytest.approx(-96.27e6, rel=1e-4)
    i_p = math.sqrt(2 * 10 ** (-2.28) * 1e-3 / 118.0)
    oracle_xi = 0.25 * 0.834e-3 * i_p / 5.10e-3 ** 2 * 7.2e9
    assert p.xi_abs / TWO_PI == pytest.approx(oracle_xi, rel=1e-12)
    assert p.xi_abs / TWO_PI == pytest.approx(17.2e6, rel=1e-3)
    assert p.delta_p / TWO_PI == pytest.approx(-3.079e6, rel=1e-3)
    assert p.gamma == pytest.approx(dev.omega0 / 1e5)
    expected_delta = dev.omega0 + p.delta_dc + p.delta_p - drive.omega_p / 2
    assert p.delta == pytest.approx(expected_delta, rel=1e-15)
    assert p.kerr == kerr_constant(dev)


def test_zero_bias_gives_no_mixing():
    drive = DriveCondition(i_dc=0.0, p_pump_dbm=5.0, lambda_p_db=20.0, omega_p=TWO_PI * 14.4e9)
    p = derive_dpa_params(device_72(), drive, kappa=1e8)
    assert p.xi == 0
    assert p.delta_dc == 0


def test_pump_phase_convention():
    drive = DriveCondition(i_dc=1e-3, p_pump_dbm=0.0, lambda_p_db=20.0, omega_p=TWO_PI * 14.4e9, varphi_p=0.3)
    p = derive_dpa_params(device_72(), drive, kappa=1e8)
    # xi carries a leading minus sign, i.e. an extra pi of phase.
    assert p.pump_phase == pytest.approx(0.3 + math.pi, abs=1e-12)
    shifted = derive_dpa_params(device_72(), DriveCondition(**{**drive.__dict__, "varphi_p": 0.3 + TWO_PI}), kappa=1e8)
    assert shifted.xi == pytest.approx(p.xi, rel=1e-14)


def test_kappa_from_coupling_q():
    dev = device_72(q_coupling=135.0)
    drive = DriveCondition(i_dc=0.8e-3, p_pump_dbm=0.0, lambda_p_db=20.0, omega_p=TWO_PI * 14.4e9)
    p = derive_dpa_params(dev, drive)
    assert p.kappa == pytest.approx(dev.omega0 / 135.0)
    assert p.kappa.imag == 0
    with pytest.raises(ConfigurationError):
        derive_dpa_params(device_72(), drive)


@settings(max_examples=50)
@given(st.floats(1e-5, 2e-3), st.floats(-20.0, 10.0), st.floats(0.1, 10.0))
def test_xi_is_bilinear(i_dc, p_dbm, c):
    dev = device_72()
    base = DriveCondition(i_dc=i_dc, p_pump_dbm=p_dbm, lambda_p_db=20.0, omega_p=TWO_PI * 14.4e9)
    scaled_dc = DriveCondition(i_dc=c * i_dc, p_pump_dbm=p_dbm, lambda_p_db=20.0, omega_p=base.omega_p)
    # Scaling the current by c means scaling the power by c^2.
    scaled_p = DriveCondition(i_dc=i_dc, p_pump_dbm=p_dbm + 20 * math.log10(c), lambda_p_db=20.0, omega_p=base.omega_p)
    x0 = derive_dpa_params(dev, base, kappa=1e8).xi_abs
    assert derive_dpa_params(dev, scaled_dc, kappa=1e8).xi_abs == pytest.approx(c * x0, rel=1e-12)
    assert derive_dpa_params(dev, scaled_p, kappa=1e8).xi_abs == pytest.approx(c * x0, rel=1e-11)


def test_type_invariants():
    with pytest.raises(DomainError):
        device_72(q_internal=0.5)
    with pytest.raises(DomainError):
        device_72(i_star=0.0)
    with pytest.raises(DomainError):
        DriveCondition(i_dc=-1.0, p_pump_dbm=0.0, lambda_p_db=1.0, omega_p=1.0)
    with pytest.raises(DomainError):
        DriveCondition(i_dc=0.0, p_pump_dbm=0.0, lambda_p_db=-1.0, omega_p=1.0)
    with pytest.raises(DomainError):
        DpaParams(kappa=1.0, gamma=-1.0, delta=0.0)
    with pytest.raises(DomainError):
        DpaParams(kappa=0.0, gamma=0.0, delta=0.0)
    with pytest.raises(DomainError):
        DpaParams(kappa=1.0, gamma=0.0, delta=0.0, kerr=1.0)


def test_records_round_trip():
    dev = device_72(q_coupling=135.0)
    back = device_from_record(device_to_record(dev))
    for name in ("l_total", "i_star", "omega0", "z0", "q_internal", "q_coupling"):
        assert getattr(back, name) == pytest.approx(getattr(dev, name), rel=1e-15)
    drive = DriveCondition(i_dc=0.834e-3, p_pump_dbm=3.5, lambda_p_db=22.8, omega_p=TWO_PI * 14.381e9, varphi_p=0.2)
    back = drive_from_record(drive_to_record(drive))
    for name in ("i_dc", "p_pump_dbm", "lambda_p_db", "omega_p", "varphi_p"):
        assert getattr(back, name) == pytest.approx(getattr(drive, name), rel=1e-15)


def test_records_reject_bad_fields():
    rec = device_to_record(device_72())
    with pytest.raises(ConfigurationError):
        device_from_record({**rec, "omega0_hz": 1.0})
    with pytest.raises(ConfigurationError):
        device_from_record({k: v for k, v in rec.items() if k != "z0_ohm"})
    with pytest.raises(ConfigurationError):
        device_from_record({**rec, "z0_ohm": "118"})
    with pytest.raises(ConfigurationError):
        device_from_record({**rec, "i_star_ma": -1.0})

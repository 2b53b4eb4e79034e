"""Unit conversions.

Internally every frequency and rate is angular (rad/s). Configuration files,
CSV traces and reports use cyclic frequency (Hz) and dB/dBm. All conversions
between the two live here.
"""

import numpy as np

TWO_PI = 2.0 * np.pi


def _num(x):
    # Scalars stay Python floats; sequences become float arrays.
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(x)
    return np.asarray(x, dtype=float)


def hz_to_rad(f):
    """Cyclic frequency (Hz) to angular frequency (rad/s)."""
    return TWO_PI * _num(f)


def rad_to_hz(omega):
    """Angular frequency (rad/s) to cyclic frequency (Hz)."""
    return _num(omega) / TWO_PI


def dbm_to_watt(p_dbm):
    return 10.0 ** ((_num(p_dbm) - 30.0) / 10.0)


def watt_to_dbm(p_w):
    return 10.0 * np.log10(_num(p_w)) + 30.0


def db_to_power_ratio(db):
    return 10.0 ** (_num(db) / 10.0)


def power_ratio_to_db(ratio):
    return 10.0 * np.log10(_num(ratio))


def amplitude_to_db(amplitude):
    """20 log10 |amplitude|; accepts complex values."""
    return 20.0 * np.log10(np.abs(amplitude))


def db_to_amplitude(db):
    return 10.0 ** (_num(db) / 20.0)


def attenuation_to_transmittance(att_db):
    """Positive attenuation in dB to linear power transmittance (``inf`` -> 0)."""
    return 10.0 ** (-_num(att_db) / 10.0)

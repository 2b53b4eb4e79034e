"""Kinetic-inductance film and drive parameters -> effective DPA Hamiltonian.

A biased, pumped kinetic-inductance resonator is described in the frame
rotating at half the pump frequency by

    H/hbar = Delta a^dag a + xi/2 a^dag^2 + xi^*/2 a^2 + K/2 a^dag^2 a^2

with the parameters computed by :func:`derive_dpa_params` from the film
(:class:`FilmDevice`) and the drive (:class:`DriveCondition`).

All rates are angular (rad/s); configuration records use GHz, mA, nH, dBm,
dB and ohm and are converted on load.
"""

from dataclasses import dataclass, replace
import math

import numpy as np
from scipy.constants import hbar

from .errors import ConfigurationError, DomainError
from .units import TWO_PI, _num, attenuation_to_transmittance, dbm_to_watt

__all__ = [
    "FilmDevice",
    "DriveCondition",
    "DpaParams",
    "kinetic_inductance",
    "pump_current",
    "kerr_constant",
    "derive_dpa_params",
    "biased_resonance",
    "device_from_record",
    "drive_from_record",
    "device_to_record",
    "drive_to_record",
]


@dataclass(frozen=True)
class FilmDevice:
    """Static resonator and film parameters.

    Parameters
    ----------
    l_total : float
        Total zero-current kinetic inductance L_T (H).
    i_star : float
        Nonlinearity scale current I_* (A).
    omega0 : float
        Zero-bias fundamental angular frequency (rad/s).
    z0 : float
        Resonator characteristic impedance (ohm).
    q_internal : float
        Internal quality factor, gamma = omega0 / q_internal.
    q_coupling : float, optional
        Coupling quality factor. Only needed when no coupling rate is passed
        to :func:`derive_dpa_params`.
    """

    l_total: float
    i_star: float
    omega0: float
    z0: float
    q_internal: float
    q_coupling: float | None = None

    def __post_init__(self):
        for name in ("l_total", "i_star", "omega0", "z0", "q_internal"):
            value = getattr(self, name)
            if not value > 0 or (name != "q_internal" and not math.isfinite(value)):
                raise DomainError(f"{name} must be strictly positive, got {value!r}")
        if self.q_internal < 1:
            raise DomainError(f"q_internal must be >= 1, got {self.q_internal!r}")
        if self.q_coupling is not None and not self.q_coupling > 0:
            raise DomainError(f"q_coupling must be strictly positive, got {self.q_coupling!r}")

    @property
    def gamma(self):
        """Internal loss rate omega0 / Q_i (rad/s)."""
        return self.omega0 / self.q_internal


@dataclass(frozen=True)
class DriveCondition:
    """DC bias and pump settings.

    ``lambda_p_db`` is the pump-line loss stored as a positive attenuation;
    the linear transmittance is ``10**(-lambda_p_db/10)``. ``varphi_p`` is the
    phase of the pump tone ``I_p cos(omega_p t + varphi_p)``.
    """

    i_dc: float
    p_pump_dbm: float
    lambda_p_db: float
    omega_p: float
    varphi_p: float = 0.0

    def __post_init__(self):
        if not self.i_dc >= 0:
            raise DomainError(f"i_dc must be >= 0, got {self.i_dc!r}")
        if not self.lambda_p_db >= 0:
            raise DomainError(f"lambda_p_db must be >= 0, got {self.lambda_p_db!r}")
        if not self.omega_p > 0:
            raise DomainError(f"omega_p must be > 0, got {self.omega_p!r}")

    @property
    def transmittance(self):
        return float(attenuation_to_transmittance(self.lambda_p_db))


@dataclass(frozen=True)
class DpaParams:
    """Effective parameters of the ideal-DPA model (all rad/s).

    ``kappa`` may be complex to model an asymmetric reflection response.
    ``xi`` is complex; its phase carries the pump phase,
    ``xi = |xi| exp(-1j * phase)``.
    """

    kappa: complex
    gamma: float
    delta: float
    xi: complex = 0j
    kerr: float = 0.0
    delta_dc: float = 0.0
    delta_p: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kappa", complex(self.kappa))
        object.__setattr__(self, "xi", complex(self.xi))
        if not self.gamma >= 0:
            raise DomainError(f"gamma must be >= 0, got {self.gamma!r}")
        if not abs(self.kappa) > 0:
            raise DomainError("|kappa| must be > 0")
        if self.kerr > 0:
            raise DomainError(f"kerr must be <= 0, got {self.kerr!r}")

    @property
    def kappa_real(self):
        return self.kappa.real

    @property
    def kappa_bar(self):
        """Half the total loss rate, (kappa + gamma) / 2 (complex if kappa is)."""
        return (self.kappa + self.gamma) / 2

    @property
    def xi_abs(self):
        return abs(self.xi)

    @property
    def pump_phase(self):
        """Phase ``phi`` such that ``xi = |xi| exp(-1j phi)``, in [0, 2 pi)."""
        return float(np.mod(-np.angle(self.xi), TWO_PI))

    def replace(self, **changes):
        return replace(self, **changes)

    def with_xi(self, xi_abs, phase=None):
        """Copy with ``|xi|`` (and optionally its phase) replaced."""
        phase = self.pump_phase if phase is None else phase
        return replace(self, xi=xi_abs * np.exp(-1j * phase))


def kinetic_inductance(l0, i, i_star):
    """Current-dependent kinetic inductance ``l0 (1 + (i / i_star)^2)``."""
    if not i_star > 0:
        raise DomainError(f"i_star must be > 0, got {i_star!r}")
    return l0 * (1.0 + (_num(i) / i_star) ** 2)


def pump_current(p_pump_dbm, lambda_p_db, z0):
    """Pump current amplitude at the device, ``sqrt(2 lambda_p P / Z0)`` (A).

    ``p_pump_dbm`` is the source power and ``lambda_p_db`` the line
    attenuation in dB.
    """
    if not z0 > 0:
        raise DomainError(f"z0 must be > 0, got {z0!r}")
    p_w = dbm_to_watt(p_pump_dbm) * attenuation_to_transmittance(lambda_p_db)
    return np.sqrt(2.0 * p_w / z0)


def kerr_constant(device):
    """Self-Kerr constant ``K = -(3/8) hbar omega0^2 / (L_T I_*^2)`` (rad/s)."""
    return -0.375 * hbar * device.omega0 ** 2 / (device.l_total * device.i_star ** 2)


def biased_resonance(device, i_dc):
    """Resonance under DC bias without pump, ``omega0 (1 - I_DC^2 / (2 I_*^2))``."""
    i_dc = _num(i_dc)
    if np.any(i_dc < 0):
        raise DomainError("i_dc must be >= 0")
    return device.omega0 * (1.0 - 0.5 * (i_dc / device.i_star) ** 2)


def derive_dpa_params(device, drive, kappa=None):
    """Map device and drive to :class:`DpaParams`.

    Parameters
    ----------
    device : FilmDevice
    drive : DriveCondition
    kappa : complex, optional
        Coupling rate (rad/s). Defaults to the real ``omega0 / q_coupling``.

    Raises
    ------
    ConfigurationError
        If neither ``kappa`` nor ``device.q_coupling`` is available.
    """
    if kappa is None:
        if device.q_coupling is None:
            raise ConfigurationError("need either an explicit kappa or device.q_coupling")
        kappa = device.omega0 / device.q_coupling
    w0 = device.omega0
    ratio_dc = drive.i_dc / device.i_star
    i_p = float(pump_current(drive.p_pump_dbm, drive.lambda_p_db, device.z0))
    ratio_p = i_p / device.i_star

    delta_dc = -0.5 * ratio_dc ** 2 * w0
    delta_p = -0.125 * ratio_p ** 2 * w0
    xi = -0.25 * ratio_dc * ratio_p * w0 * np.exp(-1j * drive.varphi_p)
    delta = w0 + delta_dc + delta_p - drive.omega_p / 2
    return DpaParams(
        kappa=kappa,
        gamma=device.gamma,
        delta=delta,
        xi=xi,
        kerr=kerr_constant(device),
        delta_dc=delta_dc,
        delta_p=delta_p,
    )


# -- configuration records ---------------------------------------------------
# Field names carry their units; frequencies are cyclic (omega*_ghz means
# omega/2pi expressed in GHz).

_DEVICE_FIELDS = {
    "l_total_nh": ("l_total", 1e-9),
    "i_star_ma": ("i_star", 1e-3),
    "omega0_ghz": ("omega0", TWO_PI * 1e9),
    "z0_ohm": ("z0", 1.0),
    "q_internal": ("q_internal", 1.0),
}
_DRIVE_FIELDS = {
    "i_dc_ma": ("i_dc", 1e-3),
    "p_pump_dbm": ("p_pump_dbm", 1.0),
    "lambda_p_db": ("lambda_p_db", 1.0),
    "omega_p_ghz": ("omega_p", TWO_PI * 1e9),
}


def _number(record, key, where):
    try:
        value = record[key]
    except KeyError:
        raise ConfigurationError(f"{where}: missing field {key!r}") from None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"{where}: field {key!r} must be a number, got {value!r}")
    return float(value)


def device_from_record(record):
    """Build a :class:`FilmDevice` from a unit-suffixed JSON record."""
    if not isinstance(record, dict):
        raise ConfigurationError("device: expected an object")
    kwargs = {attr: _number(record, key, "device") * scale for key, (attr, scale) in _DEVICE_FIELDS.items()}
    if record.get("q_coupling") is not None:
        kwargs["q_coupling"] = _number(record, "q_coupling", "device")
    unknown = set(record) - set(_DEVICE_FIELDS) - {"q_coupling"}
    if unknown:
        raise ConfigurationError(f"device: unknown fields {sorted(unknown)}")
    try:
        return FilmDevice(**kwargs)
    except DomainError as exc:
        raise ConfigurationError(f"device: {exc}") from exc


def drive_from_record(record):
    """Build a :class:`DriveCondition` from a unit-suffixed JSON record."""
    if not isinstance(record, dict):
        raise ConfigurationError("drive: expected an object")
    kwargs = {attr: _number(record, key, "drive") * scale for key, (attr, scale) in _DRIVE_FIELDS.items()}
    kwargs["varphi_p"] = _number(record, "varphi_p_rad", "drive") if "varphi_p_rad" in record else 0.0
    unknown = set(record) - set(_DRIVE_FIELDS) - {"varphi_p_rad"}
    if unknown:
        raise ConfigurationError(f"drive: unknown fields {sorted(unknown)}")
    try:
        return DriveCondition(**kwargs)
    except DomainError as exc:
        raise ConfigurationError(f"drive: {exc}") from exc


def device_to_record(device):
    record = {key: getattr(device, attr) / scale for key, (attr, scale) in _DEVICE_FIELDS.items()}
    if device.q_coupling is not None:
        record["q_coupling"] = device.q_coupling
    return record


def drive_to_record(drive):
    record = {key: getattr(drive, attr) / scale for key, (attr, scale) in _DRIVE_FIELDS.items()}
    record["varphi_p_rad"] = drive.varphi_p
    return record

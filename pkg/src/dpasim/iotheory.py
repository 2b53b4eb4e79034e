"""Input-output theory of the ideal DPA.

Reflection and signal/idler gains, phase-sensitive gain, the parametric
self-oscillation threshold and gain-bandwidth extraction.

Frames: ``omega`` arguments called *rotating-frame* offsets are
``omega_lab - omega_p / 2``.
"""

from dataclasses import dataclass, replace
import logging

import numpy as np
from scipy import optimize

from .circuit import derive_dpa_params
from .errors import BracketingError, ExtractionError, SingularityError, ThresholdError
from .units import _num

log = logging.getLogger(__name__)

__all__ = [
    "TransferGains",
    "Spectrum",
    "GainBandwidth",
    "KappaTable",
    "reflection_gain",
    "reflection_spectrum",
    "signal_idler_gains",
    "commutation_residual",
    "phase_sensitive_gain",
    "is_above_threshold",
    "threshold_pump_power",
    "pump_power_for",
    "gain_bandwidth_product",
]


@dataclass(frozen=True)
class TransferGains:
    """Signal and idler gains at rotating-frame offsets ``omega`` (rad/s)."""

    g_s: np.ndarray
    g_i: np.ndarray
    omega: np.ndarray


@dataclass(frozen=True)
class Spectrum:
    """A reflection trace on a laboratory frequency axis.

    ``values`` are either complex reflection coefficients or real gains in
    dB; ``kind`` says which (``"gamma"`` or ``"gain_db"``).
    """

    axis: np.ndarray
    values: np.ndarray
    kind: str = "gamma"

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float)
        values = np.asarray(self.values)
        if self.kind not in ("gamma", "gain_db"):
            raise ValueError(f"unknown spectrum kind {self.kind!r}")
        if axis.ndim != 1 or values.shape != axis.shape:
            raise ValueError("axis and values must be 1-D and of equal length")
        if axis.size > 1 and not np.all(np.diff(axis) > 0):
            raise ValueError("spectrum axis must be strictly increasing")
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "values", values)

    @property
    def amplitude(self):
        """Linear amplitude gain ``|Gamma|``."""
        if self.kind == "gamma":
            return np.abs(self.values)
        return 10.0 ** (self.values.astype(float) / 20.0)

    @property
    def gain_db(self):
        if self.kind == "gain_db":
            return self.values.astype(float)
        return 20.0 * np.log10(np.abs(self.values))


def is_above_threshold(params):
    """Signed self-oscillation margin ``|xi|^2 / (Delta^2 + kappa_bar^2) - 1``.

    Uses the real part of ``kappa``. Positive values mean the device
    oscillates instead of amplifying.
    """
    kappa_bar = (params.kappa.real + params.gamma) / 2
    return params.xi_abs ** 2 / (params.delta ** 2 + kappa_bar ** 2) - 1.0


def _require_below_threshold(params):
    margin = is_above_threshold(params)
    if margin >= 0:
        raise ThresholdError(margin)
    return margin


def _check_finite(denominator):
    if np.any(denominator == 0):
        raise SingularityError("evaluated at a zero of the gain denominator")


def _gamma_kernel(kappa, gamma, delta, xi_abs, w_rot):
    # Reflection coefficient in the laboratory convention; no domain checks.
    kb = (kappa + gamma) / 2
    den = delta ** 2 + (kb + 1j * w_rot) ** 2 - xi_abs ** 2
    return kappa * (kb + 1j * (delta + w_rot)) / den - 1.0, den


def reflection_gain(params, omega_lab, omega_p):
    """Reflection coefficient ``Gamma`` at laboratory frequency ``omega_lab``.

    ``|Gamma|^2`` is the phase-insensitive power gain. ``kappa`` may be
    complex.

    Raises
    ------
    ThresholdError
        If the parameters are at or above the oscillation threshold.
    SingularityError
        If the denominator vanishes exactly.
    """
    _require_below_threshold(params)
    w_rot = _num(omega_lab) - omega_p / 2
    gamma, den = _gamma_kernel(params.kappa, params.gamma, params.delta, params.xi_abs, w_rot)
    _check_finite(den)
    return gamma


def reflection_spectrum(params, freq_hz, omega_p):
    """Evaluate :func:`reflection_gain` on a laboratory axis in Hz."""
    freq_hz = np.asarray(freq_hz, dtype=float)
    return Spectrum(freq_hz, reflection_gain(params, 2 * np.pi * freq_hz, omega_p), kind="gamma")


def signal_idler_gains(params, omega):
    """Signal and idler gains at rotating-frame offset ``omega``.

    ``g_s = (kappa kappa_bar - 1j kappa (Delta + omega)) / D - 1`` and
    ``g_i = -1j xi kappa / D`` with
    ``D = Delta^2 + (kappa_bar - 1j omega)^2 - |xi|^2``.
    """
    _require_below_threshold(params)
    omega = _num(omega)
    kappa, kb, delta = params.kappa, params.kappa_bar, params.delta
    den = delta ** 2 + (kb - 1j * omega) ** 2 - params.xi_abs ** 2
    _check_finite(den)
    g_s = (kappa * kb - 1j * kappa * (delta + omega)) / den - 1.0
    g_i = -1j * params.xi * kappa / den
    return TransferGains(g_s=g_s, g_i=g_i, omega=omega)


def commutation_residual(params, gains):
    """Relative residual of ``|g_i|^2 (1 + r) = |g_s|^2 + r |g_s + 1|^2 - 1``.

    ``r = gamma / Re(kappa)``. Zero (to rounding) for real ``kappa``.
    """
    r = params.gamma / params.kappa.real
    lhs = np.abs(gains.g_i) ** 2 * (1 + r)
    rhs = np.abs(gains.g_s) ** 2 + r * np.abs(gains.g_s + 1) ** 2 - 1
    scale = np.abs(gains.g_s) ** 2 + r * np.abs(gains.g_s + 1) ** 2 + 1
    return np.abs(lhs - rhs) / scale


def phase_sensitive_gain(params, varphi_p):
    """Degenerate amplitude gain ``|g_s[0] + g_i[0]|`` versus pump phase.

    ``varphi_p`` is the phase in ``xi = |xi| exp(-1j varphi_p)``; the phase
    stored in ``params.xi`` is ignored. Square the result for power gain.
    """
    _require_below_threshold(params)
    phi = _num(varphi_p)
    kappa, kb, delta = params.kappa, params.kappa_bar, params.delta
    den = delta ** 2 + kb ** 2 - params.xi_abs ** 2
    _check_finite(den)
    xi = params.xi_abs * np.exp(-1j * phi)
    g_s = (kappa * kb - 1j * kappa * delta) / den - 1.0
    g_i = -1j * xi * kappa / den
    return np.abs(g_s + g_i)


class KappaTable:
    """Coupling rate tabulated against source pump power.

    Magnitude and phase are interpolated linearly in dBm. Values outside
    the table are clamped to the end points.
    """

    def __init__(self, p_dbm, kappa):
        p_dbm = np.asarray(p_dbm, dtype=float)
        kappa = np.asarray(kappa, dtype=complex)
        if p_dbm.ndim != 1 or p_dbm.shape != kappa.shape or p_dbm.size < 1:
            raise ValueError("p_dbm and kappa must be equal-length 1-D sequences")
        order = np.argsort(p_dbm)
        self.p_dbm = p_dbm[order]
        self.kappa = kappa[order]
        if np.any(np.diff(self.p_dbm) <= 0):
            raise ValueError("duplicate pump powers in kappa table")

    @classmethod
    def constant(cls, kappa):
        return cls([0.0], [kappa])

    @property
    def span(self):
        return float(self.p_dbm[0]), float(self.p_dbm[-1])

    def __call__(self, p_dbm):
        mag = np.interp(p_dbm, self.p_dbm, np.abs(self.kappa))
        arg = np.interp(p_dbm, self.p_dbm, np.unwrap(np.angle(self.kappa)))
        out = mag * np.exp(1j * arg)
        return complex(out) if np.ndim(out) == 0 else out


def _as_kappa_function(kappa_of_power):
    if callable(kappa_of_power):
        return kappa_of_power
    return KappaTable.constant(kappa_of_power)


def _params_at(device, drive, kappa_fn, p_dbm):
    return derive_dpa_params(device, replace(drive, p_pump_dbm=float(p_dbm)), kappa=kappa_fn(p_dbm))


def pump_power_for(metric, target, device, drive, kappa_of_power, bracket, xtol=1e-9):
    """Source pump power (dBm) at which ``metric(params) == target``.

    ``metric`` maps :class:`~dpasim.circuit.DpaParams` to a number and must
    change sign (relative to ``target``) across ``bracket``. Bisection.
    """
    kappa_fn = _as_kappa_function(kappa_of_power)

    def f(p):
        return metric(_params_at(device, drive, kappa_fn, p)) - target

    lo, hi = bracket
    f_lo, f_hi = f(lo), f(hi)
    if np.sign(f_lo) == np.sign(f_hi):
        raise BracketingError(f"no sign change on [{lo}, {hi}] dBm (f={f_lo:.4g}, {f_hi:.4g})")
    return float(optimize.bisect(f, lo, hi, xtol=xtol))


def threshold_pump_power(device, drive, kappa_of_power, bracket=None, xtol=1e-9):
    """Source pump power (dBm) where the oscillation margin crosses zero.

    Parameters
    ----------
    device, drive
        The film and a drive template; its ``p_pump_dbm`` is ignored.
    kappa_of_power : KappaTable, callable or complex
        Coupling rate as a function of source power (rad/s).
    bracket : (float, float), optional
        Search interval in dBm. Defaults to the span of a :class:`KappaTable`.
    """
    if bracket is None:
        if not isinstance(kappa_of_power, KappaTable) or kappa_of_power.p_dbm.size < 2:
            raise BracketingError("a bracket is required unless kappa_of_power is a multi-point KappaTable")
        bracket = kappa_of_power.span
    p = pump_power_for(is_above_threshold, 0.0, device, drive, kappa_of_power, bracket, xtol=xtol)
    log.debug("oscillation threshold at %.6f dBm", p)
    return p


@dataclass(frozen=True)
class GainBandwidth:
    peak_gain_db: float
    bandwidth_hz: float
    gbp_hz: float
    peak_freq_hz: float


def _crossing(f0, f1, a0, a1, level):
    return f0 + (level - a0) * (f1 - f0) / (a1 - a0)


def gain_bandwidth_product(spectrum):
    """Peak amplitude gain G, full width at G/sqrt(2), and their product.

    Crossings are linearly interpolated between adjacent samples, taking the
    pair nearest the peak.

    Raises
    ------
    ExtractionError
        If the maximum sits on the edge of the axis or a crossing is missing.
    """
    amp = spectrum.amplitude
    f = spectrum.axis
    i_pk = int(np.argmax(amp))
    if i_pk == 0 or i_pk == amp.size - 1:
        raise ExtractionError("gain maximum is not interior to the axis")
    peak = amp[i_pk]
    level = peak / np.sqrt(2.0)

    below = np.nonzero(amp[:i_pk] < level)[0]
    above = np.nonzero(amp[i_pk + 1:] < level)[0]
    if below.size == 0 or above.size == 0:
        raise ExtractionError("G/sqrt(2) crossings not bracketed within the axis")
    j = below[-1]
    k = i_pk + 1 + above[0]
    f_lo = _crossing(f[j], f[j + 1], amp[j], amp[j + 1], level)
    f_hi = _crossing(f[k - 1], f[k], amp[k - 1], amp[k], level)
    bandwidth = f_hi - f_lo
    return GainBandwidth(
        peak_gain_db=float(20 * np.log10(peak)),
        bandwidth_hz=float(bandwidth),
        gbp_hz=float(peak * bandwidth),
        peak_freq_hz=float(f[i_pk]),
    )


def kappa_from_gbp(gbp_hz):
    """Coupling rate (rad/s) implied by a high-gain gain-bandwidth product."""
    return 2 * np.pi * gbp_hz

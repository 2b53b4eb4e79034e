"""Parameter recovery from gain, bias, noise and compression traces."""

from dataclasses import dataclass, field
import json
import logging
import math

import numpy as np

from ..circuit import biased_resonance
from ..errors import ExtractionError, FitError, NotSaturatedError
from ..iotheory import Spectrum, _gamma_kernel, gain_bandwidth_product
from ..noisechain import thermal_occupation
from ..traces import Trace
from ..units import TWO_PI, dbm_to_watt
from .lm import levenberg_marquardt

log = logging.getLogger(__name__)

__all__ = [
    "FitResult",
    "CompressionPoint",
    "GainFitModel",
    "fit_gain_spectrum",
    "fit_istar",
    "calibrate_conversion",
    "calibration_traces",
    "fit_noise_asymptote",
    "compression_point",
]


def _round12(value):
    return float(f"{value:.12g}") if math.isfinite(value) else None


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _round12(float(obj))
    return obj


@dataclass(frozen=True)
class FitResult:
    """Named estimates with units, covariance (in the same units and order)
    and solver diagnostics. ``extras`` carries derived or auxiliary
    quantities that were not fitted directly.
    """

    values: dict
    units: dict
    covariance: np.ndarray
    residual_rms: float
    n_iterations: int
    converged: bool = True
    message: str = ""
    extras: dict = field(default_factory=dict)

    @property
    def names(self):
        return list(self.values)

    @property
    def stderr(self):
        return {n: float(math.sqrt(max(self.covariance[i, i], 0.0))) for i, n in enumerate(self.values)}

    def to_dict(self):
        return _jsonable(
            {
                "values": self.values,
                "units": self.units,
                "stderr": self.stderr,
                "covariance": self.covariance,
                "residual_rms": self.residual_rms,
                "n_iterations": self.n_iterations,
                "converged": self.converged,
                "message": self.message,
                "extras": self.extras,
            }
        )

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _ordered(trace):
    if not isinstance(trace, Trace):
        raise TypeError("expected a Trace")
    return trace.sorted()


# -- gain spectrum -----------------------------------------------------------


class GainFitModel:
    """Forward model of ``20 log10 |Gamma|`` in the gain-fit parameters.

    The parameter vector is ``(|kappa|/2pi in MHz, arg kappa in rad,
    lambda_p in dB)``; everything else comes from ``device`` and ``drive``
    (whose ``lambda_p_db`` is ignored).
    """

    def __init__(self, device, drive):
        self.device, self.drive = device, drive
        w0, i_star = device.omega0, device.i_star
        self._ratio_dc = drive.i_dc / i_star
        self._delta_dc = -0.5 * self._ratio_dc ** 2 * w0
        self._p_w = dbm_to_watt(drive.p_pump_dbm)

    def hamiltonian(self, p):
        """``(kappa, Delta, |xi|)`` at parameter vector ``p``."""
        dev = self.device
        kappa = p[0] * TWO_PI * 1e6 * np.exp(1j * p[1])
        i_p = math.sqrt(2.0 * 10.0 ** (-p[2] / 10.0) * self._p_w / dev.z0)
        ratio_p = i_p / dev.i_star
        delta_p = -0.125 * ratio_p ** 2 * dev.omega0
        xi_abs = 0.25 * self._ratio_dc * ratio_p * dev.omega0
        delta = dev.omega0 + self._delta_dc + delta_p - self.drive.omega_p / 2
        return kappa, delta, xi_abs

    def margin(self, p):
        kappa, delta, xi_abs = self.hamiltonian(p)
        kb = (kappa.real + self.device.gamma) / 2
        return xi_abs ** 2 / (delta ** 2 + kb ** 2) - 1.0

    def gain_db(self, p, freq_hz):
        kappa, delta, xi_abs = self.hamiltonian(p)
        w_rot = TWO_PI * np.asarray(freq_hz, dtype=float) - self.drive.omega_p / 2
        with np.errstate(divide="ignore", invalid="ignore"):
            gamma, _ = _gamma_kernel(kappa, self.device.gamma, delta, xi_abs, w_rot)
            return 20.0 * np.log10(np.abs(gamma))


def _initial_kappa_mhz(trace):
    spec = Spectrum(trace.x, trace.y, kind="gain_db")
    try:
        return gain_bandwidth_product(spec).gbp_hz / 1e6
    except ExtractionError:
        return (trace.x[-1] - trace.x[0]) / 4e6


def fit_gain_spectrum(trace, device, drive, init=None, max_iter=200, barrier_weight=None, barrier_margin=-1e-4):
    """Fit ``|kappa|``, ``arg kappa`` and ``lambda_p`` to a gain trace.

    Parameters
    ----------
    trace : Trace
        Gain in dB of ``|Gamma|^2`` against laboratory frequency in Hz.
    device, drive : FilmDevice, DriveCondition
        Fixed parameters (``Q_i``, ``I_*``, ``omega0``, ``Z0``, ``I_DC``,
        ``omega_p``, pump power). ``drive.lambda_p_db`` is ignored.
    init : sequence of 3 floats, optional
        Start ``(|kappa|/2pi in Hz, arg kappa, lambda_p_db)``. By default
        ``|kappa|`` comes from the trace's gain-bandwidth product, ``arg
        kappa = 0`` and ``lambda_p = 25`` dB.
    barrier_weight : float, optional
        Weight of the extra residual ``w max(0, margin - barrier_margin)``
        that pushes iterates back below the oscillation threshold. The
        default is heavy enough that steps across the threshold are
        rejected, which keeps the solver out of the spurious above-threshold
        minimum that noisy high-gain traces otherwise fall into.

    Raises
    ------
    FitError
        If the solver does not converge within ``max_iter`` iterations.
    """
    trace = _ordered(trace)
    model = GainFitModel(device, drive)
    sigma = np.ones_like(trace.y) if trace.sigma is None else trace.sigma
    if barrier_weight is None:
        barrier_weight = 1e6 * math.sqrt(trace.x.size)
    if init is None:
        p0 = np.array([_initial_kappa_mhz(trace), 0.0, 25.0])
    else:
        p0 = np.array([init[0] / 1e6, init[1], init[2]], dtype=float)

    def residuals(p):
        r = (model.gain_db(p, trace.x) - trace.y) / sigma
        r = np.where(np.isfinite(r), r, 1e6)
        excess = max(0.0, model.margin(p) - barrier_margin)
        return np.append(r, barrier_weight * excess)

    res = levenberg_marquardt(residuals, p0, max_iter=max_iter)
    cov = res.covariance()
    scale = np.array([1e6, 1.0, 1.0])
    cov = cov * np.outer(scale, scale)
    data_r = res.residuals[:-1] * sigma
    rms = float(np.sqrt(np.mean(data_r ** 2)))
    kappa_abs_hz = float(res.x[0]) * 1e6
    w_r = float(biased_resonance(device, drive.i_dc))
    result = FitResult(
        values={"kappa_abs_hz": kappa_abs_hz, "kappa_arg": float(res.x[1]), "lambda_p_db": float(res.x[2])},
        units={"kappa_abs_hz": "Hz", "kappa_arg": "rad", "lambda_p_db": "dB"},
        covariance=cov,
        residual_rms=rms,
        n_iterations=res.n_iterations,
        converged=res.converged,
        message=res.message,
        extras={
            "kappa_abs": TWO_PI * kappa_abs_hz,
            "q_coupling": w_r / (TWO_PI * kappa_abs_hz),
            "threshold_margin": float(model.margin(res.x)),
        },
    )
    log.debug("gain fit: %s after %d iterations (%s)", result.values, res.n_iterations, res.message)
    if not res.converged:
        raise FitError(f"gain fit did not converge: {res.message}", result)
    return result


# -- linear fits -------------------------------------------------------------


def _linear_lstsq(design, y, what):
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < design.shape[1]:
        raise FitError(f"{what}: design matrix is rank deficient ({rank} < {design.shape[1]})")
    resid = y - design @ coef
    dof = y.size - design.shape[1]
    s2 = float(resid @ resid) / dof if dof > 0 else 0.0
    cov = np.linalg.inv(design.T @ design) * s2
    return coef, resid, 0.5 * (cov + cov.T)


def fit_istar(trace, resonance_hz=None):
    """Fit ``omega_r = omega0 (1 - I^2 / (2 I_*^2)) + c4 I^4`` to a bias sweep.

    Parameters
    ----------
    trace : Trace or array_like
        Resonance frequency (Hz) against bias current (A), or the bias
        currents with ``resonance_hz`` given separately.

    Returns
    -------
    FitResult
        ``omega0`` (rad/s), ``i_star`` (A) and ``c4`` (rad/s/A^4);
        ``extras`` holds ``f0_hz``. ``residual_rms`` is relative to
        ``omega0``.

    Raises
    ------
    FitError
        With fewer than 4 distinct bias points, a rank-deficient design or a
        non-negative quadratic coefficient.
    """
    if resonance_hz is None:
        trace = _ordered(trace)
        bias, f_r = trace.x, trace.y
    else:
        bias = np.asarray(trace, dtype=float)
        f_r = np.asarray(resonance_hz, dtype=float)
        order = np.argsort(bias, kind="stable")
        bias, f_r = bias[order], f_r[order]
    if np.unique(bias).size < 4:
        raise FitError("I_* fit needs at least 4 distinct bias points")
    i_ma2 = (bias * 1e3) ** 2
    design = np.column_stack([np.ones_like(i_ma2), i_ma2, i_ma2 ** 2])
    y = TWO_PI * f_r
    coef, resid, cov = _linear_lstsq(design, y, "I_* fit")
    a, b, c = coef
    if not b < 0 or not a > 0:
        raise FitError("resonance does not decrease with bias; I_* undefined")
    i_star = 1e-3 * math.sqrt(-a / (2 * b))
    # Linear map of coefficient perturbations onto (omega0, I_*, c4) in SI.
    t = np.array([[1.0, 0.0, 0.0], [i_star / (2 * a), -i_star / (2 * b), 0.0], [0.0, 0.0, 1e12]])
    full_cov = t @ cov @ t.T
    return FitResult(
        values={"omega0": float(a), "i_star": i_star, "c4": float(c) * 1e12},
        units={"omega0": "rad/s", "i_star": "A", "c4": "rad/s/A^4"},
        covariance=full_cov,
        residual_rms=float(np.sqrt(np.mean(resid ** 2)) / abs(a)),
        n_iterations=1,
        extras={"f0_hz": float(a) / TWO_PI},
    )


def fit_noise_asymptote(trace):
    """Fit ``n = n_inf + n_sys / G_k`` to input-referred noise against gain.

    ``trace.x`` is the linear power gain and ``trace.y`` the photon number.
    """
    trace = _ordered(trace)
    if trace.x.size < 3:
        raise FitError("noise asymptote fit needs at least 3 gain points")
    design = np.column_stack([np.ones_like(trace.x), 1.0 / trace.x])
    coef, resid, cov = _linear_lstsq(design, trace.y, "noise asymptote fit")
    return FitResult(
        values={"n_inf": float(coef[0]), "n_sys": float(coef[1])},
        units={"n_inf": "photons", "n_sys": "photons"},
        covariance=cov,
        residual_rms=float(np.sqrt(np.mean(resid ** 2))),
        n_iterations=1,
    )


def calibration_traces(temp_k, gain_linear, p_on_w, p_off_w, frequency):
    """Group a noise sweep by gain into ``(P_on - P_off)`` versus ``n_th`` traces.

    Returns ``(traces, gains)`` ordered by increasing gain.
    """
    temp_k, gain_linear = np.asarray(temp_k, float), np.asarray(gain_linear, float)
    diff = np.asarray(p_on_w, float) - np.asarray(p_off_w, float)
    n_th = thermal_occupation(frequency, temp_k)
    keys = np.array([float(f"{g:.12g}") for g in gain_linear])
    traces, gains = [], []
    for g in np.unique(keys):
        sel = keys == g
        traces.append(Trace.from_unsorted(np.atleast_1d(n_th)[sel], diff[sel], x_tag="n_th", y_tag="p_diff_w"))
        gains.append(float(g))
    return traces, gains


def calibrate_conversion(sweeps, gains, loss_ratio=None):
    """Conversion factor ``z G_T`` from temperature sweeps at several gains.

    Each sweep (``P_on - P_off`` in W against ``n_th``) is fitted with a
    line of slope ``m``. A line through the origin of ``m`` against
    ``G_k - 1`` has slope ``2 z G_T``. Sweeps at unit gain carry no
    information and are skipped.

    Parameters
    ----------
    loss_ratio : float, optional
        ``gamma / kappa`` of the DPA. When given, ``extras`` reports the
        factor ``1 + gamma/kappa`` and the correspondingly raised estimate;
        ``values`` is never corrected.
    """
    if len(sweeps) != len(gains):
        raise FitError("need one gain per sweep")
    slopes, excess, slope_var, intercepts = [], [], [], []
    for tr, g in zip(sweeps, gains):
        if g - 1 <= 1e-12:
            continue
        tr = _ordered(tr)
        if tr.x.size < 3:
            raise FitError("each calibration sweep needs at least 3 temperatures")
        design = np.column_stack([tr.x, np.ones_like(tr.x)])
        coef, _, cov = _linear_lstsq(design, tr.y, "calibration slope fit")
        slopes.append(coef[0])
        intercepts.append(coef[1])
        slope_var.append(cov[0, 0])
        excess.append(g - 1)
    if len(slopes) < 2:
        raise FitError("calibration needs at least 2 gains above unity")
    m, x = np.array(slopes), np.array(excess)
    s = float(m @ x / (x @ x))
    resid = m - s * x
    var_s = float(resid @ resid) / (x.size - 1) / float(x @ x)
    z_g_t = s / 2
    extras = {"slopes": m.tolist(), "intercepts": intercepts, "gain_minus_one": x.tolist()}
    if loss_ratio is not None:
        extras["loss_factor"] = 1.0 + loss_ratio
        extras["z_g_t_loss_corrected"] = z_g_t * (1.0 + loss_ratio)
    return FitResult(
        values={"z_g_t": z_g_t},
        units={"z_g_t": "W/photon"},
        covariance=np.array([[var_s / 4]]),
        residual_rms=float(np.sqrt(np.mean(resid ** 2)) / max(abs(s), 1e-300)),
        n_iterations=1,
        extras=extras,
    )


# -- compression -------------------------------------------------------------


@dataclass(frozen=True)
class CompressionPoint:
    p_1db_in_dbm: float
    p_1db_out_dbm: float
    g0_db: float


def compression_point(trace, n_reference=10):
    """1-dB compression point of a gain-versus-signal-power trace.

    ``g0`` is the mean gain of the ``n_reference`` lowest-power points; the
    input compression power is the first crossing of ``g0 - 1`` dB, linearly
    interpolated; the output power is ``p_in + g0 - 1``.

    Raises
    ------
    NotSaturatedError
        If the gain never falls 1 dB below ``g0``.
    """
    trace = _ordered(trace)
    if trace.x.size < n_reference + 1:
        raise ExtractionError(f"compression trace needs at least {n_reference + 1} points")
    g0 = float(np.mean(trace.y[:n_reference]))
    level = g0 - 1.0
    below = np.nonzero(trace.y < level)[0]
    below = below[below > 0]
    if below.size == 0:
        raise NotSaturatedError(f"gain never drops 1 dB below {g0:.4g} dB")
    k = int(below[0])
    x0, x1, y0, y1 = trace.x[k - 1], trace.x[k], trace.y[k - 1], trace.y[k]
    p_in = float(x0 + (level - y0) * (x1 - x0) / (y1 - y0))
    return CompressionPoint(p_1db_in_dbm=p_in, p_1db_out_dbm=p_in + g0 - 1.0, g0_db=g0)

"""Quadrature squeezing transformation, reflection-corrupted ellipses and
vacuum squeezing levels.

The DPA acts on the input quadrature vector ``(I, Q)`` through the real 2x2
matrix

    A_G(phi) = c [[kb - |xi| sin phi, -|xi| cos phi + Delta],
                  [-|xi| cos phi - Delta, kb + |xi| sin phi]] - 1

with ``kb = (kappa + gamma)/2`` and ``c = kappa / (Delta^2 + kb^2 - |xi|^2)``.
Writing ``A_G = rho R(theta0) + beta F(phi)`` with
``F(phi) = [[sin phi, cos phi], [cos phi, -sin phi]]`` shows that changing
``phi`` conjugates ``A_G`` by a rotation through *half* the phase change:
``A_G(phi) = R(-phi/2) A_G(0) R(phi/2)``. Singular values and determinant
are therefore independent of ``phi``; ``det A_G = 1 - c gamma``.

Phases follow the convention ``xi = |xi| exp(-1j phi)``.
"""

from dataclasses import dataclass
import math
import warnings

import numpy as np
from scipy import optimize

from .errors import AlignmentError, ComplexKappaWarning, DegenerateInputError, DomainError
from .iotheory import _require_below_threshold
from .units import TWO_PI, _num

__all__ = [
    "SqueezeTransform",
    "QuadraturePoint",
    "ReflectionModel",
    "GainPair",
    "rotation",
    "transform_matrix",
    "aligned_phase",
    "ellipse_sweep",
    "align_quadratures",
    "extract_gs_ga",
    "observed_gains",
    "noise_variance_gain",
    "squeezing_extremum",
    "vacuum_squeezing_level",
    "anti_squeezing_level",
]


def rotation(theta):
    """Standard 2x2 rotation matrix ``[[cos, -sin], [sin, cos]]``."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class SqueezeTransform:
    """The squeezing matrix ``m`` evaluated at pump phase ``varphi_p``.

    ``complex_kappa_warning`` is set when ``params.kappa`` had a non-zero
    imaginary part that was dropped.
    """

    m: np.ndarray
    varphi_p: float
    params: object
    complex_kappa_warning: bool = False

    @property
    def det(self):
        return float(np.linalg.det(self.m))

    @property
    def singular_values(self):
        return np.linalg.svd(self.m, compute_uv=False)


@dataclass(frozen=True)
class QuadraturePoint:
    i: float
    q: float

    def __post_init__(self):
        if not (math.isfinite(self.i) and math.isfinite(self.q)):
            raise DomainError("quadrature amplitudes must be finite")


@dataclass(frozen=True)
class ReflectionModel:
    """Unamplified leakage ``r`` with phase ``phi`` added to the DPA output.

    The transmitted fraction is ``t = sqrt(1 - r^2)``.
    """

    r: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.r <= 1.0:
            raise DomainError(f"reflection magnitude must lie in [0, 1], got {self.r!r}")

    @property
    def t(self):
        return math.sqrt(1.0 - self.r ** 2)


@dataclass(frozen=True)
class GainPair:
    """Observed amplification ``g_a_db`` and deamplification ``g_s_db`` (dB)."""

    g_s_db: float
    g_a_db: float


def _real_coefficients(params):
    # Real-kappa inputs to A_G plus a flag saying whether Im(kappa) was dropped.
    flagged = params.kappa.imag != 0
    if flagged:
        warnings.warn(
            "squeezing matrix is defined for real kappa; using Re(kappa)",
            ComplexKappaWarning,
            stacklevel=3,
        )
    kappa = params.kappa.real
    kb = (kappa + params.gamma) / 2
    c = kappa / (params.delta ** 2 + kb ** 2 - params.xi_abs ** 2)
    return kappa, kb, c, flagged


def transform_matrix(params, varphi_p):
    """Squeezing matrix ``A_G(varphi_p)``.

    Raises
    ------
    ThresholdError
        At or above the oscillation threshold.
    """
    _require_below_threshold(params)
    _, kb, c, flagged = _real_coefficients(params)
    x, d = params.xi_abs, params.delta
    s, co = math.sin(varphi_p), math.cos(varphi_p)
    m = c * np.array([[kb - x * s, -x * co + d], [-x * co - d, kb + x * s]]) - np.eye(2)
    return SqueezeTransform(m=m, varphi_p=float(varphi_p), params=params, complex_kappa_warning=flagged)


def aligned_phase(params, method="principal"):
    """Pump phase that puts the amplified output axis on a quadrature.

    Parameters
    ----------
    method : {"principal", "closed_form"}
        ``"principal"`` returns the phase at which the major axis of the
        output ellipse lies exactly along I: ``theta0 - pi/2 (mod 2 pi)`` where
        ``theta0 = atan2(-c Delta, c kb - 1)``. It equals ``3 pi / 2`` at
        ``Delta = 0``, where ``A_G`` is diagonal. ``"closed_form"`` returns
        ``pi/2 - arccos(-Delta / |xi|)`` without wrapping.

    Raises
    ------
    AlignmentError
        ``"principal"`` with ``xi = 0``; ``"closed_form"`` with
        ``|Delta| > |xi|``.
    """
    if method == "closed_form":
        if params.xi_abs == 0 or abs(params.delta) > params.xi_abs:
            raise AlignmentError(f"|Delta| = {abs(params.delta):.6g} exceeds |xi| = {params.xi_abs:.6g}")
        return math.pi / 2 - math.acos(-params.delta / params.xi_abs)
    if method != "principal":
        raise ValueError(f"unknown alignment method {method!r}")
    if params.xi_abs == 0:
        raise AlignmentError("no preferred axis without three-wave mixing (xi = 0)")
    _require_below_threshold(params)
    _, kb, c, _ = _real_coefficients(params)
    theta0 = math.atan2(-c * params.delta, c * kb - 1.0)
    return float(np.mod(theta0 - math.pi / 2, TWO_PI))


def _combined_map(params, varphi_p, refl):
    a = transform_matrix(params, varphi_p).m
    return refl.t * a + refl.r * rotation(refl.phi)


def ellipse_sweep(params, varphi_p, refl=None, amplitude=1.0, n_phases=360):
    """Map a circle of coherent inputs through ``t A_G + r R(phi)``.

    Input points are ``amplitude (cos theta_k, sin theta_k)`` with
    ``theta_k = 2 pi k / n_phases``.

    Returns
    -------
    list of QuadraturePoint
    """
    if n_phases < 8:
        raise DomainError(f"n_phases must be >= 8, got {n_phases}")
    refl = ReflectionModel() if refl is None else refl
    theta = TWO_PI * np.arange(n_phases) / n_phases
    pts = amplitude * np.vstack([np.cos(theta), np.sin(theta)])
    out = _combined_map(params, varphi_p, refl) @ pts
    return [QuadraturePoint(float(i), float(q)) for i, q in out.T]


def _as_array(points):
    if len(points) and isinstance(points[0], QuadraturePoint):
        return np.array([[p.i, p.q] for p in points])
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("points must be QuadraturePoints or an (N, 2) array")
    return arr


def align_quadratures(points):
    """Rotate a sampled ellipse so its major axis lies along I.

    The axis is the leading eigenvector of the second-moment matrix about
    the centroid. Returns ``(aligned_points, angle)`` where ``angle`` is the
    rotation that was removed.
    """
    arr = _as_array(points)
    centred = arr - arr.mean(axis=0)
    w, v = np.linalg.eigh(centred.T @ centred)
    major = v[:, np.argmax(w)]
    angle = math.atan2(major[1], major[0])
    rotated = arr @ rotation(-angle).T
    return [QuadraturePoint(float(i), float(q)) for i, q in rotated], angle


def extract_gs_ga(on_points, off_points):
    """Amplification and deamplification from pump-on/off ellipses.

    ``G_A = ptp(I_on) / ptp(I_off)`` and ``G_S = ptp(Q_off) / ptp(Q_on)``,
    both returned in dB of amplitude. Both sweeps must already be aligned
    with amplification along I.
    """
    on, off = _as_array(on_points), _as_array(off_points)
    ptp_on, ptp_off = np.ptp(on, axis=0), np.ptp(off, axis=0)
    if np.any(ptp_on == 0) or np.any(ptp_off == 0):
        raise DegenerateInputError("a quadrature has zero peak-to-peak extent")
    g_a = ptp_on[0] / ptp_off[0]
    g_s = ptp_off[1] / ptp_on[1]
    return GainPair(g_s_db=float(20 * np.log10(g_s)), g_a_db=float(20 * np.log10(g_a)))


def observed_gains(params, refl=None, varphi_p=None, n_phases=720):
    """Amplification and deamplification as seen through a leaky input.

    The pump-on ellipse from :func:`ellipse_sweep` is software-aligned with
    :func:`align_quadratures`; the pump-off reference is the input circle.
    ``varphi_p`` defaults to the principal :func:`aligned_phase`.
    """
    if varphi_p is None:
        varphi_p = aligned_phase(params)
    on = ellipse_sweep(params, varphi_p, refl, amplitude=1.0, n_phases=n_phases)
    on, _ = align_quadratures(on)
    theta = TWO_PI * np.arange(n_phases) / n_phases
    off = np.column_stack([np.cos(theta), np.sin(theta)])
    return extract_gs_ga(on, off)


def noise_variance_gain(params, varphi_p, n_th=0.0):
    """Output I-quadrature variance relative to vacuum, in dB.

    ``10 log10(g11^2 + g12^2 + (gamma/kappa)((g11 + 1)^2 + g12^2))`` times
    ``2 n_th + 1`` when input and bath share the thermal occupation
    ``n_th``. Vectorised over ``varphi_p``.
    """
    _require_below_threshold(params)
    if n_th < 0:
        raise DomainError("n_th must be >= 0")
    kappa, kb, c, _ = _real_coefficients(params)
    phi = _num(varphi_p)
    x, d = params.xi_abs, params.delta
    g11 = c * (kb - x * np.sin(phi)) - 1.0
    g12 = c * (d - x * np.cos(phi))
    r = params.gamma / kappa
    var = g11 ** 2 + g12 ** 2 + r * ((g11 + 1.0) ** 2 + g12 ** 2)
    return 10.0 * np.log10(var * (2.0 * n_th + 1.0))


def squeezing_extremum(params, n_th=0.0, kind="min", n_grid=720):
    """Extremum of :func:`noise_variance_gain` over the pump phase.

    A uniform grid of ``n_grid`` phases locates the basin, then golden-section
    search refines it to about 1e-7 rad. Returns ``(varphi_p, level_db)``.
    """
    if n_grid < 720:
        raise DomainError("n_grid must be >= 720")
    if kind not in ("min", "max"):
        raise ValueError("kind must be 'min' or 'max'")
    sign = 1.0 if kind == "min" else -1.0
    step = TWO_PI / n_grid
    grid = step * np.arange(n_grid)
    values = sign * noise_variance_gain(params, grid, n_th)
    k = int(np.argmin(values))
    if np.ptp(values) == 0:
        return float(grid[k]), float(sign * values[k])

    def f(phi):
        return sign * float(noise_variance_gain(params, phi, n_th))

    centre = grid[k]
    res = optimize.minimize_scalar(f, bracket=(centre - step, centre, centre + step), method="golden", tol=1e-8)
    phi, level = (res.x, res.fun) if res.fun <= values[k] else (centre, values[k])
    return float(np.mod(phi, TWO_PI)), float(sign * level)


def vacuum_squeezing_level(params, n_th=0.0):
    """Minimum output variance relative to vacuum over pump phase (dB)."""
    return squeezing_extremum(params, n_th, "min")[1]


def anti_squeezing_level(params, n_th=0.0):
    """Maximum output variance relative to vacuum over pump phase (dB)."""
    return squeezing_extremum(params, n_th, "max")[1]

"""Detection-chain noise budget.

The chain after the DPA (a cold attenuator, a 4 K attenuator, a HEMT and a
room-temperature amplifier) is reduced to one amplifier of gain ``G_T`` and
added noise ``n_sys``. The DPA contributes excess noise ``n_kn`` (phase
insensitive) or ``n_kd`` (phase sensitive) from its internal loss. Powers at
the analyzer are in watts through the conversion factor ``z`` (W/photon for
a fixed resolution bandwidth).
"""

from dataclasses import asdict, dataclass
import math

import numpy as np
from scipy.constants import h, k as k_B

from .errors import AggregationError, DomainError, SingularityError
from .iotheory import signal_idler_gains
from .units import _num

__all__ = [
    "DetectionChain",
    "Environment",
    "ChainSummary",
    "NoiseBudget",
    "MODES",
    "thermal_occupation",
    "noise_temperature_to_photons",
    "chain_aggregate",
    "kipa_gain",
    "kipa_excess_noise",
    "output_power",
    "input_referred_noise",
    "predicted_powers",
    "snr_improvement",
    "calibration_loss_factor",
]

MODES = ("degenerate", "non-degenerate", "off")


def thermal_occupation(frequency, temperature):
    """Bose-Einstein occupation ``1 / (exp(h f / k T) - 1)``; zero at ``T = 0``."""
    f, t = _num(frequency), _num(temperature)
    if np.any(np.asarray(t) < 0):
        raise DomainError("temperature must be >= 0")
    if np.any(np.asarray(f) <= 0):
        raise DomainError("frequency must be > 0")
    with np.errstate(divide="ignore", over="ignore"):
        x = np.divide(h * f, k_B * t)
        n = 1.0 / np.expm1(x)
    return float(n) if np.ndim(n) == 0 else n


def noise_temperature_to_photons(t_noise, frequency):
    """Added photons ``k T_n / (h f)`` for a datasheet noise temperature."""
    if t_noise < 0 or frequency <= 0:
        raise DomainError("noise temperature must be >= 0 and frequency > 0")
    return k_B * t_noise / (h * frequency)


@dataclass(frozen=True)
class DetectionChain:
    """Post-DPA detection chain.

    ``alpha1``/``alpha2`` are attenuator transmittances at physical
    temperatures ``t_stage1``/``t_stage2`` (K); ``g_hemt``/``g_room`` are
    amplifier power gains with added noise ``n_hemt``/``n_room`` photons;
    ``z`` is the photon-to-watt factor at the analyzer.
    """

    alpha1: float
    alpha2: float
    t_stage1: float
    t_stage2: float
    g_hemt: float
    g_room: float
    n_hemt: float
    n_room: float
    z: float

    def __post_init__(self):
        for name in ("alpha1", "alpha2"):
            if not 0 < getattr(self, name) <= 1:
                raise DomainError(f"{name} must lie in (0, 1]")
        for name in ("g_hemt", "g_room"):
            if not getattr(self, name) >= 1:
                raise DomainError(f"{name} must be >= 1")
        for name in ("n_hemt", "n_room", "t_stage1", "t_stage2"):
            if not getattr(self, name) >= 0:
                raise DomainError(f"{name} must be >= 0")
        if not self.z > 0:
            raise DomainError("z must be > 0")

    @property
    def g_t(self):
        return self.g_room * self.g_hemt * self.alpha1 * self.alpha2


@dataclass(frozen=True)
class Environment:
    """Signal frequency (Hz) and field temperature (K); ``n_th`` is derived."""

    frequency: float
    temperature: float

    def __post_init__(self):
        thermal_occupation(self.frequency, self.temperature)

    @property
    def n_th(self):
        return thermal_occupation(self.frequency, self.temperature)


@dataclass(frozen=True)
class ChainSummary:
    g_t: float
    n_sys: float
    n_stage1: float
    n_stage2: float


def chain_aggregate(chain, frequency=None, stage_occupations=None):
    """Aggregate gain ``G_T`` and system noise ``n_sys`` of the chain.

    Stage occupations are taken from ``stage_occupations`` when given, else
    from :func:`thermal_occupation` at ``frequency`` and each attenuator
    temperature.

    Raises
    ------
    AggregationError
        If ``G_T <= 1``.
    """
    if stage_occupations is None:
        if frequency is None:
            raise DomainError("need a frequency or explicit stage occupations")
        n1 = thermal_occupation(frequency, chain.t_stage1)
        n2 = thermal_occupation(frequency, chain.t_stage2)
    else:
        n1, n2 = (float(v) for v in stage_occupations)
    g_t = chain.g_t
    if not g_t > 1:
        raise AggregationError(f"aggregate chain gain must exceed 1, got {g_t:.6g}")
    a1, a2, gh, gr = chain.alpha1, chain.alpha2, chain.g_hemt, chain.g_room
    bracket = (
        a2 * (1 - a1) * (n1 + 1)
        + (1 - a2) * (n2 + 1)
        + (gh - 1) / gh * chain.n_hemt
        + (gr - 1) / (gr * gh) * chain.n_room
    )
    n_sys = gr * gh / (g_t - 1) * bracket
    return ChainSummary(g_t=g_t, n_sys=n_sys, n_stage1=n1, n_stage2=n2)


def _degenerate_pair(params, varphi_p):
    # g_s and conj(g_i) at zero offset; the default phase maximises |g_s + g_i*|.
    if varphi_p is not None:
        params = params.with_xi(params.xi_abs, varphi_p)
    gains = signal_idler_gains(params, 0.0)
    g_s, g_i_conj = gains.g_s, np.conj(gains.g_i)
    if varphi_p is None:
        g_i_conj = abs(g_i_conj) * np.exp(1j * np.angle(g_s))
    return g_s, g_i_conj


def kipa_gain(params, mode, omega=0.0, varphi_p=None):
    """DPA power gain: ``|g_s|^2`` or ``|g_s + g_i*|^2`` (1 for ``"off"``)."""
    if mode == "off":
        return 1.0
    if mode == "non-degenerate":
        return float(abs(signal_idler_gains(params, omega).g_s) ** 2)
    if mode == "degenerate":
        g_s, g_ic = _degenerate_pair(params, varphi_p)
        return float(abs(g_s + g_ic) ** 2)
    raise ValueError(f"unknown mode {mode!r}")


def kipa_excess_noise(params, mode, n_th=0.0, varphi_p=None, omega=0.0):
    """Excess photons added by the DPA's internal loss.

    ``non-degenerate``: ``(gamma/kappa) |g_s + 1|^2 / (|g_s|^2 - 1) (2 n_th + 1)``
    at rotating-frame offset ``omega``.
    ``degenerate``: ``(gamma/kappa) |g_s + 1 + g_i*|^2 / (|g_s + g_i*|^2 - 1)
    (n_th + 1/2)`` at zero offset. With ``varphi_p=None`` the pump phase of
    maximum gain is used. ``kappa`` here is ``Re(kappa)``.

    Raises
    ------
    SingularityError
        If the gain in the selected mode does not exceed one.
    """
    if n_th < 0:
        raise DomainError("n_th must be >= 0")
    r = params.gamma / params.kappa.real
    if mode == "non-degenerate":
        g_s = signal_idler_gains(params, omega).g_s
        gain = abs(g_s) ** 2
        num = abs(g_s + 1) ** 2
        bath = 2 * n_th + 1
    elif mode == "degenerate":
        g_s, g_ic = _degenerate_pair(params, varphi_p)
        gain = abs(g_s + g_ic) ** 2
        num = abs(g_s + 1 + g_ic) ** 2
        bath = n_th + 0.5
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if not gain > 1 + 1e-12:
        raise SingularityError(f"{mode} gain {gain:.6g} does not exceed unity")
    return float(r * num / (gain - 1) * bath)


def calibration_loss_factor(params):
    """Factor ``1 + gamma/kappa`` by which a loss-blind ``z G_T`` may read low."""
    return 1.0 + params.gamma / params.kappa.real


def output_power(z, g_t, g_k, n_th, n_k0, n_sys, mode):
    """Analyzer power (W) for the DPA in ``mode``.

    ``non-degenerate``: ``z G_T G_k (n_th + 1/2) + z G_T (G_k - 1)(n_th + n_k0 + 1/2)``;
    ``degenerate`` (amplified quadrature only):
    ``z G_T G_k (n_th/2 + 1/4) + z G_T (G_k - 1) n_k0 / 2``;
    ``off``: ``z G_T (n_th + 1/2)``. Every mode adds ``z (G_T - 1)(n_sys + 1/2)``.
    """
    chain = z * (g_t - 1) * (n_sys + 0.5)
    if mode == "off":
        return z * g_t * (n_th + 0.5) + chain
    if mode == "non-degenerate":
        return z * g_t * g_k * (n_th + 0.5) + z * g_t * (g_k - 1) * (n_th + n_k0 + 0.5) + chain
    if mode == "degenerate":
        return z * g_t * g_k * (n_th / 2 + 0.25) + z * g_t * (g_k - 1) * n_k0 / 2 + chain
    raise ValueError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class NoiseBudget:
    """Every intermediate of a noise budget; unused entries are ``None``.

    ``n_t`` is the input-referred total in the budget's mode: the measured
    value ``p_out / (z G_T G_k)`` when a power was supplied, else the model.
    """

    mode: str
    g_k: float
    n_th: float
    n_sys: float
    n_t: float
    n_t_model: float
    g_t: float | None = None
    n_kn: float | None = None
    n_kd: float | None = None
    p_out: float | None = None
    z_g_t: float | None = None

    @property
    def n_tn(self):
        return self.n_t if self.mode == "non-degenerate" else None

    @property
    def n_td(self):
        return self.n_t if self.mode == "degenerate" else None

    def to_dict(self):
        out = asdict(self)
        out["n_tn"], out["n_td"] = self.n_tn, self.n_td
        return out


def _model_noise(mode, g_k, n_th, n_k, n_sys, g_t):
    if mode == "non-degenerate":
        return 2 * n_th + n_k + 1 + n_sys / g_k
    if mode == "degenerate":
        return 0.25 * (2 * n_th + 2 * n_k + 1) + n_sys / g_k
    if mode == "off":
        leak = 1.0 if g_t is None else 1.0 - 1.0 / g_t
        return n_th + 0.5 + leak * (n_sys + 0.5)
    raise ValueError(f"unknown mode {mode!r}")


def input_referred_noise(p_out, z_g_t, g_k, mode, n_th=0.0, n_k=0.0, n_sys=0.0, g_t=None):
    """Input-referred noise photons for one configuration.

    Model: ``n_tn = 2 n_th + n_kn + 1 + n_sys / G_k`` and
    ``n_td = (2 n_th + 2 n_kd + 1)/4 + n_sys / G_k``. With the DPA off the
    model is ``n_th + 1/2 + (1 - 1/G_T)(n_sys + 1/2)`` (``G_T`` infinite if
    not given). A measured ``p_out`` (W) is referred back as
    ``p_out / (z_g_t G_k)``.
    """
    if mode == "off":
        g_k = 1.0
    elif not g_k > 1:
        raise DomainError(f"g_k must exceed 1 in {mode} mode")
    if p_out is not None and not z_g_t > 0:
        raise DomainError("z_g_t must be > 0")
    model = _model_noise(mode, g_k, n_th, n_k, n_sys, g_t)
    measured = None if p_out is None else p_out / (z_g_t * g_k)
    return NoiseBudget(
        mode=mode,
        g_k=float(g_k),
        n_th=float(n_th),
        n_sys=float(n_sys),
        n_t=float(model if measured is None else measured),
        n_t_model=float(model),
        g_t=g_t,
        n_kn=float(n_k) if mode == "non-degenerate" else None,
        n_kd=float(n_k) if mode == "degenerate" else None,
        p_out=p_out,
        z_g_t=z_g_t,
    )


def predicted_powers(chain, params, env, mode, omega=0.0, varphi_p=None, stage_occupations=None):
    """Full forward budget: chain reduction, DPA gain and excess noise, power.

    The excess noise is evaluated at zero temperature and held constant in
    ``n_th``. Returns a :class:`NoiseBudget` whose ``p_out`` is the
    predicted analyzer power and whose ``n_t`` refers it to the input.
    """
    summary = chain_aggregate(chain, env.frequency, stage_occupations)
    n_th = env.n_th
    g_k = kipa_gain(params, mode, omega, varphi_p)
    n_k0 = 0.0 if mode == "off" else kipa_excess_noise(params, mode, 0.0, varphi_p, omega)
    p = output_power(chain.z, summary.g_t, g_k, n_th, n_k0, summary.n_sys, mode)
    return input_referred_noise(p, chain.z * summary.g_t, g_k, mode, n_th, n_k0, summary.n_sys, summary.g_t)


def snr_improvement(reference, improved):
    """SNR gain (dB) from lowering input-referred noise ``reference -> improved``.

    Arguments are :class:`NoiseBudget` objects or photon numbers.
    """
    n_ref = reference.n_t if isinstance(reference, NoiseBudget) else float(reference)
    n_new = improved.n_t if isinstance(improved, NoiseBudget) else float(improved)
    if not (n_ref > 0 and n_new > 0):
        raise DomainError("noise photon numbers must be > 0")
    return 10.0 * math.log10(n_ref / n_new)

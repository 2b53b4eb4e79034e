"""Run configuration: JSON records with unit-suffixed field names.

Top-level keys::

    device        FilmDevice record (see dpasim.circuit)
    drive         DriveCondition record
    kappa         {"abs_mhz", "arg_rad"}: cyclic coupling rate, optional
    kappa_table   {"p_dbm": [...], "abs_mhz": [...], "arg_rad": [...]}, optional
    threshold     {"bracket_dbm": [lo, hi]}, optional
    chain         detection chain, optional
    environment   {"temperature_k", "frequency_ghz"}, optional
    reflection    {"r", "phi_rad"}, optional
    ellipse       {"varphi_p_rad"}, optional
    fit           {"trace": path, "monte_carlo": {"runs", "sigma_db"}}, optional
    calibrate     {"sweep": path, "frequency_ghz"}, optional

Relative paths are resolved against the configuration file's directory.
"""

from dataclasses import dataclass, replace
import cmath
import hashlib
import json
import math
from pathlib import Path

from .circuit import derive_dpa_params, device_from_record, drive_from_record
from .errors import ConfigurationError, DomainError
from .iotheory import KappaTable
from .noisechain import DetectionChain, Environment, noise_temperature_to_photons
from .squeezing import ReflectionModel
from .units import TWO_PI, db_to_power_ratio

__all__ = ["RunConfig", "load_config", "config_from_dict", "canonical_hash"]


def canonical_hash(obj):
    """SHA-256 of the canonical JSON form of ``obj``."""
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(text.encode()).hexdigest()


def _section(raw, key, allowed, required=()):
    sec = raw.get(key)
    if sec is None:
        return None
    if not isinstance(sec, dict):
        raise ConfigurationError(f"{key}: expected an object")
    unknown = set(sec) - set(allowed)
    if unknown:
        raise ConfigurationError(f"{key}: unknown fields {sorted(unknown)}")
    missing = [k for k in required if k not in sec]
    if missing:
        raise ConfigurationError(f"{key}: missing fields {missing}")
    return sec


def _num(sec, key, where, default=None):
    if key not in sec:
        if default is None:
            raise ConfigurationError(f"{where}: missing field {key!r}")
        return default
    value = sec[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigurationError(f"{where}: field {key!r} must be a finite number")
    return float(value)


def _num_list(sec, key, where):
    values = sec.get(key)
    if not isinstance(values, list) or not values:
        raise ConfigurationError(f"{where}: {key!r} must be a non-empty list")
    return [_num({"v": v}, "v", f"{where}.{key}") for v in values]


@dataclass(frozen=True)
class RunConfig:
    """Resolved configuration for one CLI run."""

    raw: dict
    base_dir: Path
    device: object
    drive: object
    kappa: complex | None = None
    kappa_table: KappaTable | None = None
    threshold_bracket: tuple | None = None
    chain: DetectionChain | None = None
    environment: Environment | None = None
    reflection: ReflectionModel | None = None
    ellipse_phase: float | None = None
    fit_trace: Path | None = None
    monte_carlo: dict | None = None
    calibrate_sweep: Path | None = None
    calibrate_frequency: float | None = None

    @property
    def hash(self):
        return canonical_hash(self.raw)

    def kappa_at(self, p_dbm):
        """Coupling rate (rad/s) at a source pump power, or None for Q_c."""
        if self.kappa is not None:
            return self.kappa
        if self.kappa_table is not None:
            return self.kappa_table(p_dbm)
        return None

    @property
    def kappa_function(self):
        if self.kappa_table is not None and self.kappa is None:
            return self.kappa_table
        if self.kappa is not None:
            return self.kappa
        if self.device.q_coupling is None:
            raise ConfigurationError("need kappa, kappa_table or device.q_coupling")
        return self.device.omega0 / self.device.q_coupling

    def params(self):
        """DpaParams at the configured drive."""
        try:
            return derive_dpa_params(self.device, self.drive, kappa=self.kappa_at(self.drive.p_pump_dbm))
        except ConfigurationError:
            raise
        except DomainError as exc:
            raise ConfigurationError(str(exc)) from exc

    def signal_frequency(self):
        """Environment frequency if set, else half the pump frequency (Hz)."""
        if self.environment is not None:
            return self.environment.frequency
        return self.drive.omega_p / (2 * TWO_PI)

    def n_th(self):
        return 0.0 if self.environment is None else self.environment.n_th

    def with_changes(self, **changes):
        return replace(self, **changes)


def _existing(base_dir, value, where):
    if not isinstance(value, str):
        raise ConfigurationError(f"{where}: expected a path string")
    path = (base_dir / value).resolve()
    if not path.is_file():
        raise ConfigurationError(f"{where}: file not found: {path}")
    return path


def _chain(sec, frequency):
    where = "chain"
    noise = {}
    for stage in ("hemt", "room"):
        if f"n_{stage}" in sec:
            noise[stage] = _num(sec, f"n_{stage}", where)
        elif f"t_noise_{stage}_k" in sec:
            noise[stage] = noise_temperature_to_photons(_num(sec, f"t_noise_{stage}_k", where), frequency)
        else:
            raise ConfigurationError(f"{where}: need n_{stage} or t_noise_{stage}_k")
    try:
        return DetectionChain(
            alpha1=_num(sec, "alpha1", where),
            alpha2=_num(sec, "alpha2", where),
            t_stage1=_num(sec, "t_stage1_k", where),
            t_stage2=_num(sec, "t_stage2_k", where),
            g_hemt=db_to_power_ratio(_num(sec, "g_hemt_db", where)),
            g_room=db_to_power_ratio(_num(sec, "g_room_db", where)),
            n_hemt=noise["hemt"],
            n_room=noise["room"],
            z=_num(sec, "z_w_per_photon", where),
        )
    except DomainError as exc:
        raise ConfigurationError(f"{where}: {exc}") from exc


def config_from_dict(raw, base_dir="."):
    """Validate a configuration mapping and resolve it into a :class:`RunConfig`."""
    if not isinstance(raw, dict):
        raise ConfigurationError("configuration must be a JSON object")
    known = {
        "device", "drive", "kappa", "kappa_table", "threshold", "chain", "environment",
        "reflection", "ellipse", "fit", "calibrate", "description",
    }
    unknown = set(raw) - known
    if unknown:
        raise ConfigurationError(f"unknown top-level keys {sorted(unknown)}")
    base_dir = Path(base_dir)
    if "device" not in raw or "drive" not in raw:
        raise ConfigurationError("configuration needs device and drive sections")
    device = device_from_record(raw["device"])
    drive = drive_from_record(raw["drive"])
    out = {}

    sec = _section(raw, "kappa", ("abs_mhz", "arg_rad"), ("abs_mhz",))
    if sec is not None:
        mag = _num(sec, "abs_mhz", "kappa")
        if not mag > 0:
            raise ConfigurationError("kappa: abs_mhz must be > 0")
        out["kappa"] = TWO_PI * mag * 1e6 * cmath.exp(1j * _num(sec, "arg_rad", "kappa", 0.0))

    sec = _section(raw, "kappa_table", ("p_dbm", "abs_mhz", "arg_rad"), ("p_dbm", "abs_mhz"))
    if sec is not None:
        p = _num_list(sec, "p_dbm", "kappa_table")
        mag = _num_list(sec, "abs_mhz", "kappa_table")
        arg = _num_list(sec, "arg_rad", "kappa_table") if "arg_rad" in sec else [0.0] * len(p)
        if not (len(p) == len(mag) == len(arg)) or min(mag) <= 0:
            raise ConfigurationError("kappa_table: lists must match in length and abs_mhz be > 0")
        try:
            out["kappa_table"] = KappaTable(p, [TWO_PI * m * 1e6 * cmath.exp(1j * t) for m, t in zip(mag, arg)])
        except ValueError as exc:
            raise ConfigurationError(f"kappa_table: {exc}") from exc

    sec = _section(raw, "threshold", ("bracket_dbm",))
    if sec is not None and "bracket_dbm" in sec:
        bracket = _num_list(sec, "bracket_dbm", "threshold")
        if len(bracket) != 2 or not bracket[0] < bracket[1]:
            raise ConfigurationError("threshold: bracket_dbm must be [lo, hi] with lo < hi")
        out["threshold_bracket"] = tuple(bracket)

    sec = _section(raw, "environment", ("temperature_k", "frequency_ghz"), ("temperature_k",))
    if sec is not None:
        freq = _num(sec, "frequency_ghz", "environment", drive.omega_p / (2 * TWO_PI) / 1e9) * 1e9
        try:
            out["environment"] = Environment(freq, _num(sec, "temperature_k", "environment"))
        except DomainError as exc:
            raise ConfigurationError(f"environment: {exc}") from exc
    signal_f = out["environment"].frequency if "environment" in out else drive.omega_p / (2 * TWO_PI)

    chain_keys = (
        "alpha1", "alpha2", "t_stage1_k", "t_stage2_k", "g_hemt_db", "g_room_db",
        "n_hemt", "n_room", "t_noise_hemt_k", "t_noise_room_k", "z_w_per_photon", "bandwidth_hz",
    )
    sec = _section(raw, "chain", chain_keys)
    if sec is not None:
        out["chain"] = _chain(sec, signal_f)

    sec = _section(raw, "reflection", ("r", "phi_rad"), ("r",))
    if sec is not None:
        try:
            out["reflection"] = ReflectionModel(_num(sec, "r", "reflection"), _num(sec, "phi_rad", "reflection", 0.0))
        except DomainError as exc:
            raise ConfigurationError(f"reflection: {exc}") from exc

    sec = _section(raw, "ellipse", ("varphi_p_rad",))
    if sec is not None and "varphi_p_rad" in sec:
        out["ellipse_phase"] = _num(sec, "varphi_p_rad", "ellipse")

    sec = _section(raw, "fit", ("trace", "monte_carlo"))
    if sec is not None:
        if "trace" in sec:
            out["fit_trace"] = _existing(base_dir, sec["trace"], "fit.trace")
        mc = sec.get("monte_carlo")
        if mc is not None:
            mc = _section(sec, "monte_carlo", ("runs", "sigma_db"), ("runs", "sigma_db"))
            runs = _num(mc, "runs", "fit.monte_carlo")
            sigma = _num(mc, "sigma_db", "fit.monte_carlo")
            if runs < 1 or runs != int(runs) or not sigma > 0:
                raise ConfigurationError("fit.monte_carlo: runs must be a positive integer and sigma_db > 0")
            out["monte_carlo"] = {"runs": int(runs), "sigma_db": sigma}

    sec = _section(raw, "calibrate", ("sweep", "frequency_ghz"), ("sweep",))
    if sec is not None:
        out["calibrate_sweep"] = _existing(base_dir, sec["sweep"], "calibrate.sweep")
        out["calibrate_frequency"] = _num(sec, "frequency_ghz", "calibrate", signal_f / 1e9) * 1e9

    return RunConfig(raw=raw, base_dir=base_dir, device=device, drive=drive, **out)


def load_config(path):
    """Read and validate a JSON configuration file."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigurationError(f"configuration file not found: {path}") from None
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot parse {path}: {exc}") from exc
    return config_from_dict(raw, path.resolve().parent)

"""Command-line front end.

Every command reads a JSON configuration (``--config``), evaluates library
functions and writes one CSV or JSON document to ``--out`` (stdout when
omitted). Output is assembled fully in memory and written in one step, so a
failing run leaves no partial file.

Exit codes: 0 success, 2 configuration error, 3 model-domain error (the
error record carries the threshold margin when relevant), 4 fit failure.
Errors are reported on stderr as a single JSON object.
"""

import argparse
from dataclasses import replace
import json
import logging
import os
from pathlib import Path
import sys
import tempfile

import numpy as np

from . import __version__
from .config import canonical_hash, load_config
from .errors import ConfigurationError, DpaError, FitError, ThresholdError
from .fitting import (
    calibrate_conversion,
    calibration_traces,
    compression_point,
    fit_gain_spectrum,
    fit_istar,
    fit_noise_asymptote,
)
from .fitting.fits import GainFitModel, _jsonable
from .iotheory import (
    gain_bandwidth_product,
    phase_sensitive_gain,
    reflection_spectrum,
    threshold_pump_power,
)
from .noisechain import Environment, predicted_powers
from .squeezing import (
    aligned_phase,
    ellipse_sweep,
    noise_variance_gain,
    observed_gains,
    squeezing_extremum,
)
from .traces import Trace, format_csv, read_noise_sweep_csv, read_trace_csv, spectrum_columns
from .units import TWO_PI, amplitude_to_db

log = logging.getLogger("dpasim")

COMMANDS = ("gain-spectrum", "phase-gain", "ellipse", "squeeze-budget", "noise-budget", "threshold", "fit", "calibrate")
SWEEP_VARIABLES = ("pump-power", "phase", "q-internal", "temperature")
EXIT_CONFIG, EXIT_DOMAIN, EXIT_FIT = 2, 3, 4


class Output:
    """A rendered document: either CSV columns or a JSON-able mapping."""

    def __init__(self, columns=None, record=None, comments=()):
        self.columns, self.record, self.comments = columns, record, list(comments)

    def render(self, fmt, header):
        if fmt == "csv":
            if self.columns is None:
                raise ConfigurationError("this command only produces JSON; use --format json")
            return format_csv(self.columns, [header] + self.comments)
        doc = {"header": header}
        if self.record is not None:
            doc.update(self.record)
        if self.columns is not None:
            doc["columns"] = {k: np.asarray(v).tolist() for k, v in self.columns.items()}
        return json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"


# -- single-point evaluations -------------------------------------------------


def _gain_spectrum(cfg, args):
    params = cfg.params()
    centre = cfg.drive.omega_p / (2 * TWO_PI)
    freq = centre + np.linspace(-args.span / 2, args.span / 2, args.points)
    spec = reflection_spectrum(params, freq, cfg.drive.omega_p)
    gbp = gain_bandwidth_product(spec)
    summary = {"peak_gain_db": gbp.peak_gain_db, "bandwidth_hz": gbp.bandwidth_hz, "gbp_hz": gbp.gbp_hz}
    comments = [f"{k}={v:.12g}" for k, v in summary.items()]
    return Output(spectrum_columns(spec), {"summary": summary}, comments), summary


def _phase_gain(cfg, args):
    params = cfg.params()
    phi = TWO_PI * np.arange(args.points) / args.points
    gain_db = amplitude_to_db(phase_sensitive_gain(params, phi))
    summary = {"max_gain_db": float(gain_db.max()), "min_gain_db": float(gain_db.min())}
    return Output({"varphi_p_rad": phi, "gain_db": gain_db}, {"summary": summary}), summary


def _ellipse_phase(cfg, args):
    if getattr(args, "phase_override", None) is not None:
        return args.phase_override
    if cfg.ellipse_phase is not None:
        return cfg.ellipse_phase
    return aligned_phase(cfg.params())


def _ellipse(cfg, args):
    params = cfg.params()
    phase = _ellipse_phase(cfg, args)
    n = max(args.points, 8)
    pts = ellipse_sweep(params, phase, cfg.reflection, 1.0, n)
    theta = TWO_PI * np.arange(n) / n
    gains = observed_gains(params, cfg.reflection, phase, n_phases=max(n, 720))
    summary = {"varphi_p_rad": phase, "g_a_db": gains.g_a_db, "g_s_db": gains.g_s_db}
    cols = {"theta_rad": theta, "i_out": [p.i for p in pts], "q_out": [p.q for p in pts]}
    return Output(cols, {"summary": summary}, [f"{k}={v:.12g}" for k, v in summary.items()]), summary


def _squeeze_budget(cfg, args):
    params = cfg.params()
    n_th = cfg.n_th()
    phi = TWO_PI * np.arange(args.points) / args.points
    s = noise_variance_gain(params, phi, n_th)
    phi_min, s_v = squeezing_extremum(params, n_th, "min")
    _, s_max = squeezing_extremum(params, n_th, "max")
    summary = {"s_v_db": s_v, "anti_squeezing_db": s_max, "varphi_p_min_rad": phi_min, "n_th": n_th}
    comments = [f"{k}={v:.12g}" for k, v in summary.items()]
    return Output({"varphi_p_rad": phi, "variance_gain_db": s}, {"summary": summary}, comments), summary


def _noise_budget(cfg, args):
    if cfg.chain is None or cfg.environment is None:
        raise ConfigurationError("noise-budget needs chain and environment sections")
    params = cfg.params()
    budgets = {mode: predicted_powers(cfg.chain, params, cfg.environment, mode) for mode in ("off", "non-degenerate", "degenerate")}
    rows = list(budgets.values())
    cols = {
        "g_k_db": [10 * np.log10(b.g_k) for b in rows],
        "n_t": [b.n_t for b in rows],
        "n_t_model": [b.n_t_model for b in rows],
        "p_out_w": [b.p_out for b in rows],
    }
    summary = {
        "snr_nondegenerate_db": 10 * np.log10(rows[0].n_t / rows[1].n_t),
        "snr_degenerate_db": 10 * np.log10(rows[0].n_t / rows[2].n_t),
    }
    record = {"budgets": {m: b.to_dict() for m, b in budgets.items()}, "summary": summary}
    comments = ["rows: off, non-degenerate, degenerate"]
    return Output(cols, record, comments), {**summary, "n_tn": rows[1].n_t, "n_td": rows[2].n_t, "n_off": rows[0].n_t}


def _threshold(cfg, args):
    p = threshold_pump_power(cfg.device, cfg.drive, cfg.kappa_function, bracket=cfg.threshold_bracket)
    summary = {"threshold_dbm": p}
    return Output({"threshold_dbm": [p]}, {"summary": summary}), summary


def _fit_output(result):
    cols = {name: [value] for name, value in result.values.items()}
    cols["residual_rms"] = [result.residual_rms]
    return Output(cols, {"fit": result.to_dict()})


def _monte_carlo(trace, cfg, result, mc, seed):
    model = GainFitModel(cfg.device, cfg.drive)
    p = np.array([result.values["kappa_abs_hz"] / 1e6, result.values["kappa_arg"], result.values["lambda_p_db"]])
    clean = model.gain_db(p, trace.x)
    rng = np.random.default_rng(seed)
    fits = []
    for _ in range(mc["runs"]):
        noisy = Trace(trace.x, clean + rng.normal(0.0, mc["sigma_db"], clean.size))
        fits.append(list(fit_gain_spectrum(noisy, cfg.device, cfg.drive).values.values()))
    fits = np.array(fits)
    return {"runs": mc["runs"], "sigma_db": mc["sigma_db"], "seed": seed, "std": dict(zip(result.values, fits.std(axis=0, ddof=1).tolist()))}


def _fit(cfg, args):
    path = Path(args.trace) if args.trace else cfg.fit_trace
    if path is None:
        raise ConfigurationError("fit needs --trace or fit.trace in the configuration")
    if not path.is_file():
        raise ConfigurationError(f"trace file not found: {path}")
    trace = read_trace_csv(path)
    if trace.x_tag == "freq_hz":
        result = fit_gain_spectrum(trace, cfg.device, cfg.drive)
        if cfg.monte_carlo is not None:
            seed = 0 if args.seed is None else args.seed
            result = replace(result, extras={**result.extras, "monte_carlo": _monte_carlo(trace, cfg, result, cfg.monte_carlo, seed)})
        return _fit_output(result), result.values
    if trace.x_tag == "bias_a":
        result = fit_istar(trace)
    elif trace.x_tag == "gain_linear":
        result = fit_noise_asymptote(trace)
    elif trace.x_tag == "sigpow_dbm":
        cp = compression_point(trace)
        values = {"p_1db_in_dbm": cp.p_1db_in_dbm, "p_1db_out_dbm": cp.p_1db_out_dbm, "g0_db": cp.g0_db}
        return Output({k: [v] for k, v in values.items()}, {"compression": values}), values
    else:
        raise ConfigurationError(f"no fit defined for axis {trace.x_tag!r}")
    return _fit_output(result), result.values


def _calibrate(cfg, args):
    if cfg.calibrate_sweep is None:
        raise ConfigurationError("calibrate needs a calibrate.sweep file in the configuration")
    data = read_noise_sweep_csv(cfg.calibrate_sweep)
    traces, gains = calibration_traces(
        data["temp_k"], data["gain_linear"], data["p_on_w"], data["p_off_w"], cfg.calibrate_frequency
    )
    params = cfg.params()
    result = calibrate_conversion(traces, gains, loss_ratio=params.gamma / params.kappa.real)
    return _fit_output(result), result.values


HANDLERS = {
    "gain-spectrum": _gain_spectrum,
    "phase-gain": _phase_gain,
    "ellipse": _ellipse,
    "squeeze-budget": _squeeze_budget,
    "noise-budget": _noise_budget,
    "threshold": _threshold,
    "fit": _fit,
    "calibrate": _calibrate,
}


# -- sweeps -------------------------------------------------------------------


def _apply(cfg, args, variable, value):
    if variable == "pump-power":
        return cfg.with_changes(drive=replace(cfg.drive, p_pump_dbm=value)), args
    if variable == "phase":
        point_args = argparse.Namespace(**vars(args))
        point_args.phase_override = value
        return cfg.with_changes(drive=replace(cfg.drive, varphi_p=value)), point_args
    if variable == "q-internal":
        return cfg.with_changes(device=replace(cfg.device, q_internal=value)), args
    if variable == "temperature":
        if cfg.environment is None:
            env = Environment(cfg.signal_frequency(), value)
        else:
            env = replace(cfg.environment, temperature=value)
        return cfg.with_changes(environment=env), args
    raise ConfigurationError(f"unknown sweep variable {variable!r}")


def _sweep(cfg, args):
    if args.inner not in HANDLERS or args.inner in ("fit", "calibrate"):
        raise ConfigurationError(f"cannot sweep command {args.inner!r}")
    if args.variable == "pump-power" and args.inner == "threshold":
        raise ConfigurationError("threshold cannot be swept over pump power")
    if not args.num >= 1:
        raise ConfigurationError("--num must be >= 1")
    if args.num > 1 and not args.start < args.stop:
        raise ConfigurationError("sweep range needs start < stop")
    if args.variable == "q-internal" and args.log:
        axis = np.logspace(np.log10(args.start), np.log10(args.stop), args.num)
    else:
        axis = np.linspace(args.start, args.stop, args.num)
    rows = {}
    for value in axis:
        value = float(value)
        try:
            point_cfg, point_args = _apply(cfg, args, args.variable, value)
            _, summary = HANDLERS[args.inner](point_cfg, point_args)
        except DpaError as exc:
            exc.sweep_point = {args.variable: value}
            raise
        for key, v in summary.items():
            rows.setdefault(key, []).append(v)
    name = args.variable.replace("-", "_")
    cols = {name: axis}
    cols.update(rows)
    return Output(cols, {"sweep": {"variable": args.variable, "inner": args.inner}}), None


# -- entry point ----------------------------------------------------------------


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON configuration file")
    common.add_argument("--out", help="output file (stdout if omitted)")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--span", type=float, default=400e6, help="gain-spectrum span in Hz")
    common.add_argument("--points", type=int, default=None, help="number of samples")
    common.add_argument("--seed", type=int, default=None, help="RNG seed for Monte-Carlo fits")
    common.add_argument("--trace", default=None, help="trace CSV for fit (overrides fit.trace)")

    parser = argparse.ArgumentParser(prog="dpasim", description="Degenerate parametric amplifier toolkit")
    parser.add_argument("--version", action="version", version=f"dpasim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    sw = sub.add_parser("sweep", parents=[common])
    sw.add_argument("variable", choices=SWEEP_VARIABLES)
    sw.add_argument("--inner", required=True, choices=COMMANDS)
    sw.add_argument("--start", type=float, required=True)
    sw.add_argument("--stop", type=float, required=True)
    sw.add_argument("--num", type=int, default=11)
    sw.add_argument("--log", action="store_true", help="logarithmic spacing (q-internal)")
    return parser


_DEFAULT_POINTS = {"gain-spectrum": 2001, "phase-gain": 361, "ellipse": 360, "squeeze-budget": 720}
_DEFAULT_FORMAT = {"noise-budget": "json", "threshold": "json", "fit": "json", "calibrate": "json"}


def _write(text, out):
    if out is None:
        sys.stdout.write(text)
        return
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=out.parent, prefix=f".{out.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _error(exc, code):
    record = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    if isinstance(exc, ThresholdError):
        record["margin"] = exc.margin
    if getattr(exc, "sweep_point", None) is not None:
        record["sweep_point"] = exc.sweep_point
    sys.stderr.write(json.dumps(_jsonable(record), sort_keys=True) + "\n")
    return code


def _configure_logging():
    level = os.environ.get("DPASIM_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def run(argv=None):
    """Run the CLI and return the exit status."""
    _configure_logging()
    args = _parser().parse_args(argv)
    command = args.command
    inner = args.inner if command == "sweep" else command
    if args.points is None:
        args.points = _DEFAULT_POINTS.get(inner, 361)
    if args.points < 2:
        return _error(ConfigurationError("--points must be >= 2"), EXIT_CONFIG)
    fmt = args.format or ("csv" if command == "sweep" else _DEFAULT_FORMAT.get(command, "csv"))
    try:
        cfg = load_config(args.config)
        output, _ = (_sweep if command == "sweep" else HANDLERS[command])(cfg, args)
        flags = {k: v for k, v in sorted(vars(args).items()) if k not in ("config", "out")}
        header = f"dpasim {command} config_sha256={cfg.hash} run_sha256={canonical_hash(flags)}"
        text = output.render(fmt, header)
    except ConfigurationError as exc:
        return _error(exc, EXIT_CONFIG)
    except FitError as exc:
        return _error(exc, EXIT_FIT)
    except DpaError as exc:
        return _error(exc, EXIT_DOMAIN)
    _write(text, args.out)
    log.info("wrote %s output for %s", fmt, command)
    return 0


def main():
    sys.exit(run())

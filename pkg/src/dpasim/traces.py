"""Sampled traces and their CSV representation.

CSV files are plain comma-separated tables with a single header row. Lines
starting with ``#`` are comments; writers put the resolved configuration
hash there. Numbers are written with 12 significant digits so that output
is byte-reproducible.
"""

from dataclasses import dataclass
import io
import math
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .iotheory import Spectrum

__all__ = [
    "Trace",
    "AXIS_TAGS",
    "format_number",
    "format_csv",
    "read_csv",
    "read_spectrum_csv",
    "read_trace_csv",
    "read_noise_sweep_csv",
    "spectrum_columns",
]

AXIS_TAGS = ("freq_hz", "bias_a", "sigpow_dbm", "temp_k", "gain_linear")


@dataclass(frozen=True)
class Trace:
    """A one-dimensional trace ``y(x)`` with optional per-point ``sigma``.

    ``x`` must be strictly monotone (increasing or decreasing). ``x_tag`` and
    ``y_tag`` name the axis semantics, e.g. ``"freq_hz"`` and ``"gain_db"``.
    """

    x: np.ndarray
    y: np.ndarray
    sigma: np.ndarray | None = None
    x_tag: str = ""
    y_tag: str = ""

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 1 or y.shape != x.shape:
            raise ValueError("x and y must be 1-D and of equal length")
        if x.size > 1:
            d = np.diff(x)
            if not (np.all(d > 0) or np.all(d < 0)):
                raise ValueError("trace axis must be strictly monotone")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if self.sigma is not None:
            sigma = np.asarray(self.sigma, dtype=float)
            if sigma.shape != x.shape or np.any(sigma <= 0):
                raise ValueError("sigma must match x and be strictly positive")
            object.__setattr__(self, "sigma", sigma)

    def __len__(self):
        return self.x.size

    @classmethod
    def from_unsorted(cls, x, y, sigma=None, x_tag="", y_tag=""):
        """Build a trace from points in any order, sorting by ``x``."""
        x = np.asarray(x, dtype=float)
        order = np.argsort(x, kind="stable")
        sigma = None if sigma is None else np.asarray(sigma, dtype=float)[order]
        return cls(x[order], np.asarray(y, dtype=float)[order], sigma, x_tag, y_tag)

    def sorted(self):
        """Copy with ``x`` increasing."""
        if self.x.size > 1 and self.x[1] < self.x[0]:
            return Trace(self.x[::-1], self.y[::-1], None if self.sigma is None else self.sigma[::-1], self.x_tag, self.y_tag)
        return self


def format_number(value):
    """Deterministic text form with 12 significant digits."""
    value = float(value)
    if math.isnan(value):
        return "nan"
    if value == 0:
        return "0"
    return f"{value:.12g}"


def format_csv(columns, comments=()):
    """Render ``{name: sequence}`` as CSV text with ``# ...`` comment lines."""
    names = list(columns)
    data = [np.asarray(columns[n]).ravel() for n in names]
    lengths = {d.size for d in data}
    if len(lengths) > 1:
        raise ValueError("all columns must have the same length")
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    buf.write(",".join(names) + "\n")
    for row in zip(*data):
        buf.write(",".join(format_number(v) for v in row) + "\n")
    return buf.getvalue()


def read_csv(path):
    """Parse a CSV written by :func:`format_csv`.

    Returns ``(columns, comments)`` where ``columns`` maps header names to
    float arrays.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc}") from exc
    comments, rows = [], []
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            comments.append(stripped[1:].strip())
        else:
            rows.append([c.strip() for c in stripped.split(",")])
    if not rows:
        raise ConfigurationError(f"{path}: no header row")
    header, body = rows[0], rows[1:]
    if any(len(r) != len(header) for r in body):
        raise ConfigurationError(f"{path}: ragged rows")
    try:
        values = np.array(body, dtype=float).reshape(len(body), len(header))
    except ValueError as exc:
        raise ConfigurationError(f"{path}: non-numeric entry ({exc})") from exc
    return {name: values[:, j] for j, name in enumerate(header)}, comments


def read_spectrum_csv(path):
    """Read a spectrum with ``freq_hz,gamma_re,gamma_im`` or ``freq_hz,gain_db``.

    Rows may be in any frequency order.
    """
    cols, _ = read_csv(path)
    if "freq_hz" not in cols:
        raise ConfigurationError(f"{path}: missing freq_hz column")
    f = cols["freq_hz"]
    order = np.argsort(f, kind="stable")
    if "gamma_re" in cols and "gamma_im" in cols:
        values = (cols["gamma_re"] + 1j * cols["gamma_im"])[order]
        kind = "gamma"
    elif "gain_db" in cols:
        values, kind = cols["gain_db"][order], "gain_db"
    else:
        raise ConfigurationError(f"{path}: need gamma_re/gamma_im or gain_db columns")
    try:
        return Spectrum(f[order], values, kind=kind)
    except ValueError as exc:
        raise ConfigurationError(f"{path}: {exc}") from exc


def spectrum_columns(spectrum):
    """Column mapping for writing a :class:`Spectrum`."""
    if spectrum.kind == "gamma":
        return {
            "freq_hz": spectrum.axis,
            "gamma_re": spectrum.values.real,
            "gamma_im": spectrum.values.imag,
            "gain_db": spectrum.gain_db,
        }
    return {"freq_hz": spectrum.axis, "gain_db": spectrum.values}


def read_trace_csv(path, y_column=None):
    """Read a two-column trace whose axis header is one of :data:`AXIS_TAGS`.

    ``y_column`` selects the dependent column when there are several
    (``gain_db`` is preferred if present); an optional ``sigma`` column is
    picked up automatically.
    """
    cols, _ = read_csv(path)
    axis = [n for n in cols if n in AXIS_TAGS]
    if len(axis) != 1:
        raise ConfigurationError(f"{path}: expected exactly one axis column from {AXIS_TAGS}")
    x_tag = axis[0]
    others = [n for n in cols if n not in (x_tag, "sigma")]
    if y_column is None:
        if len(others) == 1:
            y_column = others[0]
        elif "gain_db" in others:
            y_column = "gain_db"
        else:
            raise ConfigurationError(f"{path}: ambiguous dependent column among {others}")
    if y_column not in cols:
        raise ConfigurationError(f"{path}: missing column {y_column!r}")
    try:
        return Trace.from_unsorted(cols[x_tag], cols[y_column], cols.get("sigma"), x_tag, y_column)
    except ValueError as exc:
        raise ConfigurationError(f"{path}: {exc}") from exc


def read_noise_sweep_csv(path):
    """Read ``temp_k,gain_linear,p_on_w,p_off_w`` calibration data."""
    cols, _ = read_csv(path)
    need = ("temp_k", "gain_linear", "p_on_w", "p_off_w")
    missing = [n for n in need if n not in cols]
    if missing:
        raise ConfigurationError(f"{path}: missing columns {missing}")
    return {n: cols[n] for n in need}

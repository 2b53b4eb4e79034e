"""Least-squares recovery of device, chain and operating-point parameters."""

from .fits import (
    CompressionPoint,
    FitResult,
    GainFitModel,
    calibrate_conversion,
    calibration_traces,
    compression_point,
    fit_gain_spectrum,
    fit_istar,
    fit_noise_asymptote,
)
from .lm import LMResult, levenberg_marquardt, numerical_jacobian

__all__ = [
    "CompressionPoint",
    "FitResult",
    "GainFitModel",
    "LMResult",
    "calibrate_conversion",
    "calibration_traces",
    "compression_point",
    "fit_gain_spectrum",
    "fit_istar",
    "fit_noise_asymptote",
    "levenberg_marquardt",
    "numerical_jacobian",
]

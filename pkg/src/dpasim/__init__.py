"""Modelling, simulation and fitting for kinetic-inductance degenerate
parametric amplifiers.

Submodules
----------
circuit     film and drive parameters -> effective Hamiltonian parameters
iotheory    reflection, signal/idler and phase-sensitive gain; threshold; GBP
squeezing   squeezing matrix, coherent ellipses, vacuum squeezing levels
noisechain  detection-chain reduction and input-referred noise
fitting     gain, I_*, conversion-factor, noise-asymptote and compression fits
cli         command-line front end (``dpasim``)
"""

__version__ = "0.1.0"

from . import circuit, iotheory, noisechain, squeezing, units  # noqa: E402
from .circuit import DpaParams, DriveCondition, FilmDevice, derive_dpa_params  # noqa: E402
from .errors import *  # noqa: E402,F401,F403

__all__ = [
    "circuit",
    "iotheory",
    "noisechain",
    "squeezing",
    "units",
    "DpaParams",
    "DriveCondition",
    "FilmDevice",
    "derive_dpa_params",
]

"""Numerical time-frequency analysis of unimodular Fourier multipliers.

Modules
-------
grid      uniform grids, centered Fourier transform, signal generators
gabor     STFT, modulation / Wiener amalgam / block norms
symbols   phases, multiplier symbols, Bessel potentials, Taylor split
dyadic    Littlewood-Paley family and rescaled dyadic factors
indices   dilation-exponent combinatorics on the index square
xlab      experiment harness, CSV reports and the ``tfmult`` CLI
"""

__version__ = "0.1.0"

from tfmult.errors import CoverageError, GuardError, NyquistError
from tfmult.grid import (
    GeneratorSpec,
    GridSpec,
    SampledSignal,
    dilate,
    forward_ft,
    inverse_ft,
    make_grid,
    synthesize,
    translate_modulate,
)
from tfmult.gabor import (
    INF,
    SpaceParams,
    StftMatrix,
    WindowSpec,
    amalgam_norm,
    block_modulation_norm,
    mixed_norm,
    modulation_norm,
    stft,
    weight_eval,
)

__all__ = [
    "__version__",
    "CoverageError",
    "GuardError",
    "NyquistError",
    "GeneratorSpec",
    "GridSpec",
    "SampledSignal",
    "dilate",
    "forward_ft",
    "inverse_ft",
    "make_grid",
    "synthesize",
    "translate_modulate",
    "INF",
    "SpaceParams",
    "StftMatrix",
    "WindowSpec",
    "amalgam_norm",
    "block_modulation_norm",
    "mixed_norm",
    "modulation_norm",
    "stft",
    "weight_eval",
]

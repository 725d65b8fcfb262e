"""Spectral analysis of finite Hilbert transforms on multiple intervals."""

from . import discretize, exact_diag, geometry, rhp, spectral
from .errors import MultiHilbertError
from .geometry import Configuration, MobiusMap, validate_configuration

__version__ = "0.1.0"

__all__ = [
    "Configuration",
    "MobiusMap",
    "MultiHilbertError",
    "discretize",
    "exact_diag",
    "geometry",
    "rhp",
    "spectral",
    "validate_configuration",
]

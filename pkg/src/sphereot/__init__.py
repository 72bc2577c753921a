"""Sliced optimal transport on the 2-sphere."""

from .harmonic_transforms import DiscreteMeasureS2, HarmonicCoeffs
from .inversion import PdParams, pd_invert
from .ot1d import Measure1D
from .quadrature import GridDensity, cylinder_grid, so3_grid, sphere_grid
from .sliced_distances import SlicedConfig, ssw, vsw

__version__ = "0.1.0"

__all__ = [
    "DiscreteMeasureS2",
    "GridDensity",
    "HarmonicCoeffs",
    "Measure1D",
    "PdParams",
    "SlicedConfig",
    "cylinder_grid",
    "pd_invert",
    "so3_grid",
    "sphere_grid",
    "ssw",
    "vsw",
]

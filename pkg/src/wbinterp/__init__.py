"""Numerical toolkit for interpolation in weighted Bergman spaces of the unit disk."""

__version__ = "0.1.0"

from .geometry import DiskGrid, DiskRegion, mobius, psh_add, psh_diameter, psh_distance
from .sequences import PointSet, hyperbolic_lattice, k_function, k_hat
from .weights import Weight, parse_weight, standard_weight

__all__ = [
    "__version__",
    "DiskGrid", "DiskRegion", "mobius", "psh_add", "psh_diameter", "psh_distance",
    "PointSet", "hyperbolic_lattice", "k_function", "k_hat",
    "Weight", "parse_weight", "standard_weight",
]

"""Solvers built on the density machinery: dbar equation, g_a, m_q, interpolation."""

from .dbar import DbarResult, cauchy_transform, g_family, smooth_bump, solve_dbar
from .gfunc import GConstruction, construct_g, default_eps
from .grid import GridFunction, lattice_nodes, mq_maximal
from .interp import (
    InterpolationSolution,
    OInterpolationSetup,
    merging_pair,
    o_interpolation_setup,
    solve_interpolation,
)
from .pou import PartitionOfUnity, partition_of_unity

__all__ = [
    "DbarResult", "cauchy_transform", "g_family", "smooth_bump", "solve_dbar",
    "GConstruction", "construct_g", "default_eps",
    "GridFunction", "lattice_nodes", "mq_maximal",
    "InterpolationSolution", "OInterpolationSetup", "merging_pair",
    "o_interpolation_setup", "solve_interpolation",
    "PartitionOfUnity", "partition_of_unity",
]

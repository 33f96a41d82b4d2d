"""Hybrid Hermite WENO finite-volume solvers for 1D/2D hyperbolic conservation laws."""

from .field import BoundaryCondition, MomentField, Side, apply_boundary, init_moments
from .mesh import Mesh1D, Mesh2D, build_mesh_1d, build_mesh_2d
from .physics import BuckleyLeverett, Burgers, Euler
from .problems import error_norms, preset
from .timeloop import TimeConfig, rk3_step, run

__all__ = [
    "BoundaryCondition", "MomentField", "Side", "apply_boundary", "init_moments",
    "Mesh1D", "Mesh2D", "build_mesh_1d", "build_mesh_2d",
    "BuckleyLeverett", "Burgers", "Euler",
    "error_norms", "preset",
    "TimeConfig", "rk3_step", "run",
]

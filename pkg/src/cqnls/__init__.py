"""Solvers for the 2D cubic-quintic nonlinear Schroedinger equation with cubic damping."""

from .cnfd import SolverParams, StepFailure, StepReport, evolve, step
from .grid import Field, Grid2D, make_grid, grid_from_spacing
from .nonlinearity import CubicQuinticCoeffs

__version__ = "0.1.0"

"""Spectral fractional Laplacians on grid masks and their obstacle problems."""

from .grid import BoxGrid, DomainMask, build_mask, full_mask, interval_grid, square_grid
from .restricted import RestrictedOperator
from .spectral import NavierOperator, eigendecompose
from .vi import ObstacleProblem, PenaltyConfig, solve

__version__ = "0.1.0"

__all__ = ["BoxGrid", "DomainMask", "build_mask", "full_mask", "interval_grid", "square_grid",
           "NavierOperator", "eigendecompose", "RestrictedOperator", "ObstacleProblem",
           "PenaltyConfig", "solve"]

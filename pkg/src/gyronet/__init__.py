"""Gyrovector calculus, hyperbolic layers, graph hyperbolicity, and training tools."""

from . import autodiff, ball, graphs, hyperbolicity, hyperops, layers, models, training, treedepth
from .errors import DegenerateMidpoint, DimensionMismatch, GyroError, NumericalError

__all__ = [
    "autodiff",
    "ball",
    "graphs",
    "hyperbolicity",
    "hyperops",
    "layers",
    "models",
    "training",
    "treedepth",
    "GyroError",
    "DimensionMismatch",
    "NumericalError",
    "DegenerateMidpoint",
]

__version__ = "0.1.0"

"""Qutrit dichromatic (red/green) graphical calculus and qudit phase-gate universality checks."""

from qutrit_rg.diagram import Diagram, Hadamard, PhasePair, Spider
from qutrit_rg.semantics import RG, ZERO, evaluate
from qutrit_rg.tensor import DEFAULT_TOL, proportional, projective_residual

__all__ = [
    "DEFAULT_TOL",
    "Diagram",
    "Hadamard",
    "PhasePair",
    "RG",
    "Spider",
    "ZERO",
    "evaluate",
    "projective_residual",
    "proportional",
]

__version__ = "0.1.0"

"""Numerical toolkit for interfacial energy constants of a double-gradient
two-well model: potentials on 2x2 matrices, geodesics under degenerate
metrics, 1D/2D cell problems, gluing constructions, and verification."""

__version__ = "0.1.0"

from .errors import DgmmError  # noqa: F401
from .potentials import Potential, WellPair, make_w0  # noqa: F401

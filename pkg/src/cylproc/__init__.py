"""Simulation and tail bounds for the union set of Poisson k-cylinder processes."""
from . import bounds, geometry, meanvalues, process, sampling
from .errors import *  # noqa: F401,F403

__version__ = "0.1.0"

__all__ = ["bounds", "geometry", "meanvalues", "process", "sampling"]

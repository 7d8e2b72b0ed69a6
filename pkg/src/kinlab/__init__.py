"""Spectral laboratory for kinetic transport equations."""
from .spectral import Axis, Field, GridError, MixedNormSpec, PhaseGrid

__version__ = "0.1.0"

__all__ = ["Axis", "Field", "GridError", "MixedNormSpec", "PhaseGrid", "__version__"]

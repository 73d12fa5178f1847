"""Predictive reliability of distribution grids with behind-the-meter PV and storage."""

from .kernel import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]

"""Exact scalars, matrices and integer lattice routines."""

from . import intlat, linalg, scalar

__all__ = ["intlat", "linalg", "scalar"]

"""Exact and certified experiments on simultaneous Diophantine approximation."""

from . import badlab, bestapprox, dynamics, minima, templates
from .bestapprox import best_approx_sequence, psi
from .core.linalg import Dims

__version__ = "0.1.0"

__all__ = ["Dims", "badlab", "best_approx_sequence", "bestapprox", "dynamics", "minima", "psi", "templates"]

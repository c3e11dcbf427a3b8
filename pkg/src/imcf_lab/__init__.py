"""Numerical lab for inverse mean curvature flow in metrics e^{2f}(dr^2 + lam(r)^2 sigma)."""

from .errors import ImcfLabError
from .scenarios import CATALOGUE, make_scenario

__version__ = "0.1.0"
__all__ = ["CATALOGUE", "ImcfLabError", "make_scenario", "__version__"]

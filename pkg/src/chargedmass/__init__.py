"""Numerical checks of mass, charge and curvature for charged asymptotically flat 3-manifolds."""

__version__ = "0.1.0"

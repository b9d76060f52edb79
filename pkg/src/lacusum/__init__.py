"""Finite-horizon numerics for modulated statistical and strong Cesaro convergence,
plain and lacunary."""

__version__ = "0.1.0"

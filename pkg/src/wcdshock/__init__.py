"""Finite-difference schemes with well-controlled dissipation for
nonclassical shocks."""

__version__ = "0.1.0"

"""Numerical experiments on rigidity and tolerance of planar point processes."""

__version__ = "0.1.0"

"""Isoperimetric profiles, Orlicz norms, capacities and constant transfers on the line."""

__version__ = "0.1.0"

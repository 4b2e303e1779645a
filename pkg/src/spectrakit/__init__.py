"""Numerical spectral analysis of bounded functions on the line and half-line."""

__version__ = "0.1.0"

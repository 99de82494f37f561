"""Numerical verification of the index theorem for Dirac operators with a domain wall."""

__version__ = "0.1.0"

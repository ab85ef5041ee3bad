"""Admissible electromagnetic fields on spacetimes with four-parameter motion groups."""

__version__ = "0.1.0"

"""Exact and numerical checks for d-elliptic loci with level structure."""

__version__ = "0.1.0"

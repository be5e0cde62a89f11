"""Surfaces with canonical principal direction in Euclidean 4-space."""

__version__ = "0.1.0"

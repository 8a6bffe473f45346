"""Numerical toolkit for rectifying curves in n-dimensional Euclidean space."""

__version__ = "0.1.0"

"""Laplace and p-Laplace eigenfunctions on model domains, their nodal
domains, and numerical checks of nodal-extrema and superlevel-set bounds."""

__version__ = "0.1.0"

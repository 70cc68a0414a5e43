"""Embedding high-dimensional operators into graph-structured spaces and
analysing the resulting iterative solvers through the angular distribution
of the symbol ``||T^t eta||^2``."""

__version__ = "0.1.0"

"""Finite-order variational calculus on jet coordinates with a Cech-cochain layer."""

__version__ = "0.1.0"

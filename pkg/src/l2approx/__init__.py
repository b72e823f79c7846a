"""Finite-quotient and Folner approximation of L2-signatures and L2-Betti numbers."""

__version__ = "0.1.0"

"""Numerical checks of the central limit theorem for local energies of random waves."""

__version__ = "0.1.0"

"""Landau-de Gennes nematic order around a spherical colloid."""

__version__ = "0.1.0"

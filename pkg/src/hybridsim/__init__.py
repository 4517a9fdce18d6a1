"""Coupled simulation and techno-economics of floating wind turbines carrying wave energy converters."""

__version__ = "0.1.0"

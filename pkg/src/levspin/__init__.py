"""Levitated-micromagnet spin-mechanics: magnetostatics, squeezed-frame models and open-system dynamics."""

__version__ = "0.1.0"

"""Reflected stochastic heat equation on the circle between two walls."""

__version__ = "0.1.0"

__all__: list[str] = ["__version__"]

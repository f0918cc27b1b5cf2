"""Command-line presentation layer for wallspde."""

from .app import main

__all__ = ["main"]

"""Instruction-data building and evaluation tools for visual spatial description."""

__version__ = "0.1.0"

"""Assume-guarantee contract toolkit with simulation-based evidence for an autonomous ferry."""

__version__ = "0.1.0"

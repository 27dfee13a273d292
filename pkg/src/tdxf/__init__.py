"""Exact LP extended formulations from tree-decomposition dynamic programs."""

__version__ = "0.1.0"

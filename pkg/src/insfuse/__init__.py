"""Fusion and interactive re-ranking engine for person-action instance search."""

__version__ = "0.1.0"

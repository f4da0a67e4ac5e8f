"""Partition circuits over a star network of QPUs and schedule the entanglement operations."""

__version__ = "0.1.0"

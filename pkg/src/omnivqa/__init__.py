"""Viewport-based multi-metric quality estimation for 360-degree video."""

__version__ = "0.1.0"

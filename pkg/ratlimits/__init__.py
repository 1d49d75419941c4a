"""Degenerate rational maps on the Riemann sphere: limits, measures, trees."""

__version__ = "1.0.0"

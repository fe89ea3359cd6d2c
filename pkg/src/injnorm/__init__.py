"""Bounds, estimators and Monte Carlo checks for injective norms of random tensors."""

__version__ = "0.1.0"

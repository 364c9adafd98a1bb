"""Sublinear estimation of k-disc frequency vectors on hyperfinite graphs."""

__version__ = "0.1.0"

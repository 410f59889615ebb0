"""Robust phase retrieval with l1 residuals."""
__version__ = "0.1.0"

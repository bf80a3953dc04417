"""Influence maximization with contingent seed participation."""

__version__ = "0.1.0"

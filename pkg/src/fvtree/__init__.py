"""Exact moments and Monte Carlo checks for tree-valued Fleming–Viot genealogies."""

__version__ = "0.1.0"

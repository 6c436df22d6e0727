"""Equilibrium analysis of rollup validator attention games."""

__version__ = "0.1.0"

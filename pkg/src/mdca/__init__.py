"""Exact-arithmetic toolkit for graded Lie-Rinehart data, their symmetric
coalgebras, and the associated multi derivation Maurer-Cartan algebras."""

__version__ = "0.1.0"

"""Krichever-Lax matrices on hyperelliptic curves and their flows."""

__version__ = "0.1.0"

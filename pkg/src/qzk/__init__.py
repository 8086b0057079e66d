"""Exact multiple q-zeta value kernel."""

__version__ = "0.1.0"

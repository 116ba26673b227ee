"""Algorithmic complexity estimates from small Turing machines (CTM) and block decomposition (BDM)."""

__version__ = "0.1.0"

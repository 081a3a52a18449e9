"""Harmonics of the Wigner function, Loschmidt echo and fidelity near the Dicke critical point."""

__version__ = "0.1.0"

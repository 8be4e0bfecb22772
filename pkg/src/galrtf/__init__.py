"""Geometric side of the relative trace formula for (Res_{E/Q} SL2, SL2)."""

__version__ = "0.1.0"

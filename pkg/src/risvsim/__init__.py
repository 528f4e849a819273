"""Deterministic simulator for RIS-assisted mmWave vehicular links."""

__version__ = "0.1.0"

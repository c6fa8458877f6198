"""Simulated swap-test fingerprint localization with device-independent features."""

__version__ = "0.1.0"

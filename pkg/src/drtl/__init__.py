"""Threshold-logic synthesis and analysis for dynamic resistive threshold logic (DRTL)."""

__version__ = "0.1.0"

"""Exact K-stability invariants of polarized varieties and toric test configurations."""

__version__ = "0.1.0"

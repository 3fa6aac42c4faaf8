"""Exact verification of fundamental class representatives over truncated series rings."""

__version__ = "1.1.0"

"""Unified generative aspect-based sentiment analysis with a pointer/class decoder."""

__version__ = "0.1.0"

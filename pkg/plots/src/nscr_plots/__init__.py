"""Figure generation for the stability experiments."""

__version__ = "0.1.0"

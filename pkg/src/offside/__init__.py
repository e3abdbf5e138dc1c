"""Offside-line marker for soccer broadcast frames."""

__version__ = "0.1.0"

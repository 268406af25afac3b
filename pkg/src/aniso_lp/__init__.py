"""Anisotropic function spaces on discrete product tori."""

__version__ = "0.1.0"

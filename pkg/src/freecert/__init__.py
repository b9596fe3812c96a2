"""Positivity certificates in free group algebras and desk-scale bounds on
quantum correlation sets."""

__version__ = "0.1.0"

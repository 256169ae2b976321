"""Desk-scale strawberry-arena simulator and autonomy stack."""

__version__ = "0.1.0"

"""Deterministic injection of naturalistic conversation patterns into
goal-oriented dialog test sets, plus the masked evaluation protocol."""

__version__ = "0.1.0"

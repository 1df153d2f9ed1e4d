"""Bilingual dictionary induction through a shared low-resource vector space."""

__version__ = "0.1.0"

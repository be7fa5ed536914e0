"""Abbreviation identification and in-context expansion toolkit."""

__version__ = "0.1.0"

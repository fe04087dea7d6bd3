"""Relational Schema Protocol: wire model, expressions, provider, client and CLI."""

__version__ = "0.1.0"

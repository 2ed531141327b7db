"""Exact offline virtual network embedding with rent-at-bulk capacity rental."""

__version__ = "0.1.0"

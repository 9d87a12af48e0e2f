"""Merge stakeholders' Horn rule sets into a coherent common ground."""

__version__ = "0.1.0"

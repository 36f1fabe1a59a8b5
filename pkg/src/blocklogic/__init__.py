"""Executable semantics, assertion checker and proof checker for a two-tier block storage logic."""

__version__ = "0.1.0"

"""Scheduling telescope observations over nights with an uncertain number of clear nights."""

__version__ = "0.1.0"

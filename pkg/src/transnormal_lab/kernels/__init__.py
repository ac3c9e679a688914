"""Kernel layer: flat metric encodings plus twin compute backends."""

from . import codes
from .codes import MetricCode

__all__ = ["codes", "MetricCode"]

"""Frequency-dependent squeezing-ellipse rotation in four-wave-mixing squeezed vacuum."""

__version__ = "0.1.0"

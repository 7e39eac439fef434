"""Synthetic noise curves used as test fixtures and shipped example data.

These are NOT measured data. They are smooth analytic curves shaped after a
qualitative description of a four-wave-mixing squeezer: best squeezing a
little below zero two-photon detuning, excess noise peaking near +18 MHz,
shot noise far from the gain region.
"""

from __future__ import annotations

from importlib import resources

import numpy as np
from scipy.special import expit

from .core import Curve, NoiseTrace, db_to_linear

FIXTURE_NAME = "fig2_like.csv"
FIXTURE_SPAN = (-100.0, 80.0)
FIXTURE_SPACING = 0.05


def _squeezed_level(delta):
    return db_to_linear(-3.8 - 1.4 * np.exp(-((delta + 1.0) ** 2) / 8.0))


def _squeezing_window(delta):
    return expit((delta + 70.0) / 2.5) * expit((1.0 - delta) / 0.9)


def zero_frequency_min(delta):
    """Minimizing-phase noise at zero analysis frequency (linear)."""
    delta = np.asarray(delta, dtype=float)
    s = _squeezed_level(delta)
    excess = 2.2 * expit((delta - 1.8) / 1.0) * np.exp(-((delta - 18.0) ** 2) / 128.0)
    return 1.0 - (1.0 - s) * _squeezing_window(delta) + excess


def zero_frequency_max(delta):
    """Maximizing-phase noise at zero analysis frequency (linear)."""
    delta = np.asarray(delta, dtype=float)
    s = _squeezed_level(delta)
    excess = 8.0 * expit((delta - 3.0) / 1.5) * np.exp(-((delta - 18.0) ** 2) / 128.0)
    return 1.0 + (1.0 / s - 1.0) * _squeezing_window(delta) + excess


def detuning_scan_trace(analysis_frequency: float = 1.0, spacing: float = FIXTURE_SPACING, span=FIXTURE_SPAN) -> NoiseTrace:
    """Both channels as seen at ``analysis_frequency``: the mean of the two sidebands."""
    n = int(round((span[1] - span[0]) / spacing)) + 1
    grid = span[0] + spacing * np.arange(n)
    a = analysis_frequency

    def seen(func):
        return 0.5 * (func(grid + a) + func(grid - a))

    return NoiseTrace(grid, seen(zero_frequency_min), seen(zero_frequency_max), analysis_frequency)


def single_sided_curve(span=(-150.0, 100.0), spacing: float = FIXTURE_SPACING) -> Curve:
    """Zero-frequency curve flat at -4.5 dB below zero detuning and noisy above +1 MHz."""

    def func(delta):
        squeezed = db_to_linear(-4.5)
        return squeezed + (1.0 - squeezed + 3.0 * np.exp(-((delta - 15.0) ** 2) / 200.0)) * expit((delta - 2.5) / 0.4)

    return Curve.from_function(func, span[0], span[1], spacing)


def fixture_path():
    """Traversable pointing at the shipped ``fig2_like.csv``."""
    return resources.files("fwmsqueeze").joinpath("data", FIXTURE_NAME)

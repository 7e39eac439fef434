"""Noise algebra, two-sideband synthesis, envelopes and the shot-noise-limit frequency.

Unit convention: every noise array or scalar in this package is a power
relative to shot noise in *linear* units (shot noise = 1.0) unless its name
ends in ``_db`` (shot noise = 0 dB). Frequencies and detunings are in MHz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import ndimage, signal

from .errors import ArgumentError, DataError, DomainError, RangeError

#: reduced Planck constant, J s (CODATA 2018, exact)
HBAR = 1.054571817e-34
#: ground-state hyperfine splitting of 85Rb, MHz
NU_HF_MHZ = 3036.0

GRID_RTOL = 1e-9


def db_to_linear(x_db):
    """Convert a noise power in dB (relative to shot noise) to linear units."""
    x = np.asarray(x_db, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("dB value must be finite")
    out = np.power(10.0, x / 10.0)
    return float(out) if out.ndim == 0 else out


def linear_to_db(x):
    """Inverse of :func:`db_to_linear`; raises DomainError for x <= 0."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise DomainError("linear noise power must be finite and > 0")
    out = 10.0 * np.log10(x)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SqlParams:
    """Measurement time ``tau`` (s) and mirror mass ``mass`` (kg)."""

    tau: float
    mass: float

    def __post_init__(self):
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise ArgumentError(f"tau must be > 0, got {self.tau}")
        if not (self.mass > 0 and math.isfinite(self.mass)):
            raise ArgumentError(f"mass must be > 0, got {self.mass}")


def sql_displacement(p: SqlParams) -> float:
    """Standard-quantum-limit displacement sqrt(hbar * tau / m), in meters."""
    return math.sqrt(HBAR * p.tau / p.mass)


def check_uniform_grid(grid, name="grid") -> float:
    """Validate a strictly increasing, uniformly spaced grid and return its spacing."""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise DataError(f"{name} needs at least two points")
    if not np.all(np.isfinite(grid)):
        raise DataError(f"{name} contains non-finite values")
    steps = np.diff(grid)
    if np.any(steps <= 0):
        bad = int(np.argmax(steps <= 0)) + 1
        raise DataError(f"{name} is not strictly increasing", row=bad)
    spacing = (grid[-1] - grid[0]) / (grid.size - 1)
    dev = np.abs(steps - spacing) / spacing
    if np.any(dev > GRID_RTOL):
        bad = int(np.argmax(dev > GRID_RTOL)) + 1
        raise DataError(f"{name} is not uniform (relative spacing deviation {dev[bad - 1]:.3g})", row=bad)
    return float(spacing)


@dataclass(frozen=True)
class Curve:
    """A real curve sampled on a uniform detuning grid (MHz).

    Used for the zero-analysis-frequency noise curve N(0, delta) in linear
    units. Evaluation between samples is linear; evaluation outside the grid
    is an error.
    """

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.shape != values.shape:
            raise DataError("grid and values differ in length")
        check_uniform_grid(grid)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, func: Callable, start: float, stop: float, spacing: float) -> "Curve":
        n = int(round((stop - start) / spacing)) + 1
        grid = start + spacing * np.arange(n)
        return cls(grid, func(grid))

    @property
    def spacing(self) -> float:
        return float((self.grid[-1] - self.grid[0]) / (self.grid.size - 1))

    @property
    def support(self) -> tuple[float, float]:
        return float(self.grid[0]), float(self.grid[-1])

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        tol = GRID_RTOL * self.spacing
        return bool(np.all((x >= self.grid[0] - tol) & (x <= self.grid[-1] + tol)))

    def at(self, x, label: str = "abscissa"):
        x = np.asarray(x, dtype=float)
        if not self.contains(x):
            lo, hi = self.support
            bad = x[(x < lo) | (x > hi)] if x.ndim else x
            raise RangeError(f"{label} {np.ravel(bad)[0]:g} MHz outside curve support [{lo:g}, {hi:g}] MHz")
        out = np.interp(x, self.grid, self.values)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class NoiseTrace:
    """Noise versus two-photon detuning at one analysis frequency.

    ``n_min`` / ``n_max`` are the minimizing- and maximizing-phase channels in
    linear units; use :meth:`from_db` to build one from dB columns.
    """

    grid: np.ndarray
    n_min: np.ndarray
    n_max: np.ndarray
    analysis_frequency: float = 1.0

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        n_min = np.asarray(self.n_min, dtype=float)
        n_max = np.asarray(self.n_max, dtype=float)
        if not (grid.shape == n_min.shape == n_max.shape):
            raise DataError("grid and channels differ in length")
        check_uniform_grid(grid)
        if np.any(n_min <= 0) or np.any(n_max <= 0):
            raise DataError("noise channels must be > 0 in linear units")
        # tolerance absorbs round-off from numerical post-processing
        bad = n_min > n_max * (1 + 1e-9)
        if np.any(bad):
            row = int(np.argmax(bad))
            raise DataError(f"min channel exceeds max channel at delta={grid[row]:g} MHz", row=row)
        if not (self.analysis_frequency >= 0 and math.isfinite(self.analysis_frequency)):
            raise ArgumentError("analysis frequency must be finite and >= 0")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "n_min", n_min)
        object.__setattr__(self, "n_max", n_max)

    @classmethod
    def from_db(cls, grid, n_min_db, n_max_db, analysis_frequency: float = 1.0) -> "NoiseTrace":
        return cls(grid, db_to_linear(n_min_db), db_to_linear(n_max_db), analysis_frequency)

    @property
    def n_min_db(self) -> np.ndarray:
        return linear_to_db(self.n_min)

    @property
    def n_max_db(self) -> np.ndarray:
        return linear_to_db(self.n_max)

    @property
    def min_curve(self) -> Curve:
        return Curve(self.grid, self.n_min)

    @property
    def max_curve(self) -> Curve:
        return Curve(self.grid, self.n_max)

    def __len__(self):
        return self.grid.size


@dataclass(frozen=True)
class SqueezingSpectrum:
    """Noise (dB) versus analysis frequency at fixed two-photon detuning ``delta``."""

    grid: np.ndarray
    noise_db: np.ndarray
    delta: float = 0.0

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        noise_db = np.asarray(self.noise_db, dtype=float)
        if grid.shape != noise_db.shape or grid.ndim != 1 or grid.size == 0:
            raise DataError("spectrum grid and values must be non-empty and equal length")
        if np.any(np.diff(grid) <= 0):
            raise DataError("spectrum grid must be strictly increasing")
        if grid[0] < 0:
            raise DataError("analysis frequencies must be >= 0")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "noise_db", noise_db)

    @property
    def linear(self) -> np.ndarray:
        return db_to_linear(self.noise_db)


def sideband_sum(g: Curve, omega_a, delta: float):
    """Mean of the two sidebands, [g(delta + omega_a) + g(delta - omega_a)] / 2.

    ``g`` is the zero-analysis-frequency noise curve in linear units; the mean
    is taken in linear units. ``omega_a`` may be an array.
    """
    omega_a = np.asarray(omega_a, dtype=float)
    upper = g.at(delta + omega_a, label="upper sideband delta+omega_a =")
    lower = g.at(delta - omega_a, label="lower sideband delta-omega_a =")
    out = 0.5 * (np.asarray(upper) + np.asarray(lower))
    return float(out) if out.ndim == 0 else out


def synthesize_spectrum(g: Curve, delta: float, omega_grid) -> SqueezingSpectrum:
    """Squeezing spectrum at detuning ``delta`` predicted from the zero-frequency curve ``g``."""
    omega_grid = np.asarray(omega_grid, dtype=float)
    return SqueezingSpectrum(omega_grid, linear_to_db(sideband_sum(g, omega_grid, delta)), delta)


def lower_envelope(trace: SqueezingSpectrum, window: float = 1.0, cutoff: float = 0.2) -> SqueezingSpectrum:
    """Envelope of the noise minima of an oscillating spectrum.

    A sliding-window minimum followed by a sliding-window maximum of the same
    width (a grey-scale opening, which leaves minima in place and monotone
    stretches untouched, except within one window of the ends), then a second-order Butterworth low-pass applied
    forward and backward. The result is capped at the input trace.

    Parameters
    ----------
    trace : SqueezingSpectrum
        Noise in dB on a uniform analysis-frequency grid.
    window : float
        Width of the sliding window in MHz; use at least one oscillation
        period of the scanned trace.
    cutoff : float
        Low-pass cutoff in cycles per MHz of the trace's abscissa.
    """
    spacing = check_uniform_grid(trace.grid, "spectrum grid")
    n = trace.grid.size
    span = trace.grid[-1] - trace.grid[0]
    if not window > 0:
        raise ArgumentError("window must be > 0")
    if window > span:
        raise ArgumentError(f"window {window:g} MHz longer than trace span {span:g} MHz")
    nyquist = 0.5 / spacing
    if not 0 < cutoff < nyquist:
        raise ArgumentError(f"cutoff must lie in (0, {nyquist:g}) cycles/MHz")
    width = max(1, int(round(window / spacing)))
    y = trace.noise_db
    # extend each end by the minimum of its edge window so truncated windows
    # near the ends do not pick up the local value of the oscillation
    padded = np.concatenate([np.full(width, y[:width].min()), y, np.full(width, y[-width:].min())])
    opened = ndimage.grey_opening(padded, size=width, mode="nearest")[width:-width]
    b, a = signal.butter(2, cutoff / nyquist)
    padlen = min(3 * max(len(a), len(b)), n - 1)
    smooth = signal.filtfilt(b, a, opened, padlen=padlen)
    # filter overshoot (mostly at the edges) must not lift the envelope above the trace
    smooth = np.minimum(smooth, y)
    return SqueezingSpectrum(trace.grid.copy(), smooth, trace.delta)


def snlf(envelope: SqueezingSpectrum) -> Optional[float]:
    """Shot-noise-limit frequency: first upward crossing of 0 dB.

    Returns the analysis frequency (MHz) located by linear interpolation
    between the bracketing samples, or ``None`` when the envelope never dips
    below 0 dB. If the envelope is still below 0 dB at the last sample the
    crossing lies beyond the grid and ``math.inf`` is returned.
    """
    y = np.asarray(envelope.noise_db, dtype=float)
    x = np.asarray(envelope.grid, dtype=float)
    if x.shape != y.shape:
        raise ArgumentError("envelope grid and values differ in length")
    if y.size == 0:
        raise ArgumentError("empty envelope")
    below = y < 0
    if not np.any(below):
        return None
    crossings = np.nonzero(below[:-1] & ~below[1:])[0]
    if crossings.size == 0:
        return math.inf
    i = crossings[0]
    y0, y1 = y[i], y[i + 1]
    return float(x[i] + (x[i + 1] - x[i]) * (0.0 - y0) / (y1 - y0))

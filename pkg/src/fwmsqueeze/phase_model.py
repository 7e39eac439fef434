"""Phase-resolved two-sideband noise: scanned-phase minimum versus a locked LO phase.

Each zero-frequency sideband contributes N+ + N- cos(phi): phi = 0 gives the
maximizing channel and phi = pi the minimizing one. The upper sideband
(delta + omega_a) sees the LO phase shifted by ``dphi`` relative to the lower
one. Summing two sinusoids of phi gives another sinusoid, so the minimum over
phi has a closed form.

``dphi`` arguments accept either a scalar (radians) or a callable
``dphi(delta, omega_a)`` returning radians, e.g. built from a propagation
phase sweep by :func:`fwmsqueeze.langevin.dphi_for_phase_model`.

LO phases here are 2*pi periodic, i.e. twice the quadrature angle; the
ellipse rotation angle is ``phase / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Union

import numpy as np

from .core import NoiseTrace, SqueezingSpectrum, check_uniform_grid, linear_to_db
from .errors import DataError, RangeError

DEGENERACY_TOL = 1e-12
# an abscissa counts as "on grid" within this fraction of a step
_ON_GRID_TOL = 1e-6

PhaseShift = Union[float, Callable[[float, np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class PhaseResolvedNoise:
    """Per-detuning mean ``n_plus`` and half-swing ``n_minus`` of the noise (linear units)."""

    grid: np.ndarray
    n_plus: np.ndarray
    n_minus: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        n_plus = np.asarray(self.n_plus, dtype=float)
        n_minus = np.asarray(self.n_minus, dtype=float)
        if not grid.shape == n_plus.shape == n_minus.shape:
            raise DataError("grid, n_plus and n_minus differ in length")
        check_uniform_grid(grid)
        if np.any(n_plus <= 0):
            raise DataError("n_plus must be > 0", row=int(np.argmax(n_plus <= 0)))
        bad = np.abs(n_minus) > n_plus
        if np.any(bad):
            raise DataError("|n_minus| exceeds n_plus (negative noise at some phase)", row=int(np.argmax(bad)))
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "n_plus", n_plus)
        object.__setattr__(self, "n_minus", n_minus)

    @property
    def spacing(self) -> float:
        return float((self.grid[-1] - self.grid[0]) / (self.grid.size - 1))

    def index(self, x, label="detuning"):
        """Grid index of each abscissa in ``x``; RangeError when off grid or outside."""
        x = np.asarray(x, dtype=float)
        u = (x - self.grid[0]) / self.spacing
        idx = np.rint(u).astype(int)
        off = (np.abs(u - idx) > _ON_GRID_TOL) | (idx < 0) | (idx >= self.grid.size)
        if np.any(off):
            bad = np.ravel(x)[np.argmax(np.ravel(off))]
            raise RangeError(
                f"{label} {bad:g} MHz is not a grid point of [{self.grid[0]:g}, {self.grid[-1]:g}] "
                f"step {self.spacing:g} MHz"
            )
        return idx

    def at(self, x, label="detuning"):
        idx = self.index(x, label)
        return self.n_plus[idx], self.n_minus[idx]


class PhaseMinimum(NamedTuple):
    noise: np.ndarray
    phase: np.ndarray
    degenerate: np.ndarray


def build_phase_resolved(trace: NoiseTrace) -> PhaseResolvedNoise:
    """Mean and half-difference of the max- and min-phase channels."""
    if np.any(trace.n_min > trace.n_max * (1 + 1e-9)):
        row = int(np.argmax(trace.n_min > trace.n_max * (1 + 1e-9)))
        raise DataError("min channel exceeds max channel", row=row)
    n_plus = 0.5 * (trace.n_max + trace.n_min)
    n_minus = np.maximum(0.5 * (trace.n_max - trace.n_min), 0.0)
    return PhaseResolvedNoise(trace.grid, n_plus, n_minus)


def noise_at_phase(p: PhaseResolvedNoise, delta, phi):
    """Zero-frequency noise of the sideband at ``delta`` for LO phase ``phi``."""
    n_plus, n_minus = p.at(delta)
    out = n_plus + n_minus * np.cos(phi)
    return float(out) if np.ndim(out) == 0 else out


def _resolve_dphi(dphi: PhaseShift, delta, omega_a):
    if callable(dphi):
        return np.asarray(dphi(delta, omega_a), dtype=float)
    return np.asarray(dphi, dtype=float)


def _sidebands(p, omega_a, delta):
    omega_a = np.asarray(omega_a, dtype=float)
    lower = p.at(delta - omega_a, label="lower sideband delta-omega_a =")
    upper = p.at(delta + omega_a, label="upper sideband delta+omega_a =")
    return lower, upper


def two_sideband_noise(p: PhaseResolvedNoise, omega_a, delta, phi, dphi: PhaseShift):
    """Mean of the lower sideband at phase ``phi`` and the upper one at ``phi + dphi``."""
    (pl, ml), (pu, mu) = _sidebands(p, omega_a, delta)
    shift = _resolve_dphi(dphi, delta, omega_a)
    out = 0.5 * (pl + ml * np.cos(phi) + pu + mu * np.cos(phi + shift))
    return float(out) if np.ndim(out) == 0 else out


def n_min(p: PhaseResolvedNoise, omega_a, delta, dphi: PhaseShift) -> PhaseMinimum:
    """Minimum over the LO phase of :func:`two_sideband_noise`, with its minimizer.

    The phase-dependent part is Re[(m_L + m_U e^{i dphi}) e^{i phi}] / 2, so the
    minimum is (p_L + p_U)/2 - |m_L + m_U e^{i dphi}|/2 at
    phi* = pi - arg(m_L + m_U e^{i dphi}) (wrapped to [0, 2 pi)). When the
    sinusoid is flat (amplitude < 1e-12) phi* = pi and ``degenerate`` is set.
    """
    (pl, ml), (pu, mu) = _sidebands(p, omega_a, delta)
    shift = _resolve_dphi(dphi, delta, omega_a)
    c = ml + mu * np.exp(1j * shift)
    amp = np.abs(c)
    degenerate = amp < DEGENERACY_TOL
    phase = np.where(degenerate, np.pi, np.mod(np.pi - np.angle(c), 2 * np.pi))
    noise = 0.5 * (pl + pu) - 0.5 * amp
    if np.ndim(noise) == 0:
        return PhaseMinimum(float(noise), float(phase), bool(degenerate))
    return PhaseMinimum(noise, phase, degenerate)


def lock_phase(p: PhaseResolvedNoise, delta: float, dphi: PhaseShift, lock_omega: float = 1.0):
    """LO phase a lock at ``lock_omega`` settles on: the minimizer there.

    Returns ``(phase, degenerate)``.
    """
    m = n_min(p, lock_omega, delta, dphi)
    return float(m.phase), bool(m.degenerate)


def n_locked(p: PhaseResolvedNoise, omega_a, delta, dphi: PhaseShift, phi1: float):
    """Noise with the LO phase frozen at ``phi1`` (see :func:`lock_phase`)."""
    return two_sideband_noise(p, omega_a, delta, phi1, dphi)


def scanned_spectrum(p: PhaseResolvedNoise, omega_grid, delta, dphi: PhaseShift, period: float = 1.0) -> SqueezingSpectrum:
    """Spectrum recorded while the LO phase ramps by 2 pi every ``period`` MHz of sweep."""
    omega_grid = np.asarray(omega_grid, dtype=float)
    phi = 2 * np.pi * omega_grid / period
    return SqueezingSpectrum(omega_grid, linear_to_db(two_sideband_noise(p, omega_grid, delta, phi, dphi)), delta)


@dataclass(frozen=True)
class PhaseComparison:
    """Scanned-minimum and locked spectra on a common analysis-frequency grid."""

    omega: np.ndarray
    n_min_db: np.ndarray
    n_locked_db: np.ndarray
    delta: float
    phi1: float
    degenerate_lock: bool

    @property
    def gap_db(self) -> np.ndarray:
        return self.n_locked_db - self.n_min_db


def compare_phases(p: PhaseResolvedNoise, omega_grid, delta: float, dphi: PhaseShift, lock_omega: float = 1.0) -> PhaseComparison:
    omega_grid = np.asarray(omega_grid, dtype=float)
    phi1, degenerate = lock_phase(p, delta, dphi, lock_omega)
    lo = n_min(p, omega_grid, delta, dphi).noise
    locked = n_locked(p, omega_grid, delta, dphi, phi1)
    return PhaseComparison(omega_grid, linear_to_db(lo), linear_to_db(locked), delta, phi1, degenerate)

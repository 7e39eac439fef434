"""Probe-field propagation d/dz [a, a*] = [[A, B], [B*, A*]] [a, a*] and its phase.

Coefficients A, B are in 1/m, detunings in MHz, lengths in m. Two coefficient
sources are provided: a phenomenological complex-Lorentzian model
(:func:`ab_phenomenological`, fitted defaults in ``data/langevin_defaults.ini``
produced by ``scripts/fit_langevin_defaults.py``) and tabulated CSV input
(:func:`ab_tabulated`).
"""

from __future__ import annotations

import configparser
import csv
import math
from dataclasses import asdict, dataclass, fields, replace
from importlib import resources
from pathlib import Path
from typing import Union

import numpy as np

from .errors import ArgumentError, DataError, NumericalError, RangeError

DEFAULT_STEPS = 1000
COEFFICIENT_COLUMNS = ("delta_mhz", "re_A", "im_A", "re_B", "im_B")

# reference conditions at which gain_strength and lightshift_scale are quoted
REFERENCE_DETUNING_GHZ = 0.8
REFERENCE_PUMP_MW = 200.0
REFERENCE_OPTICAL_DEPTH = 1000.0


@dataclass(frozen=True)
class MediumParams:
    """Medium and phenomenological-backend parameters.

    ``raman_center`` and ``raman_width`` (full width) are in MHz;
    ``gain_strength`` is |B| L at line center and ``lightshift_scale`` the peak
    light-shift phase, both at the reference conditions (0.8 GHz, 200 mW,
    optical depth 1000). They scale as optical_depth * pump_power / detuning**2.
    ``absorption_ratio`` sets Re A = -absorption_ratio * |B|; it does not
    affect the phase.
    """

    one_photon_detuning: float
    pump_power: float
    optical_depth: float
    cell_length: float
    raman_center: float
    raman_width: float
    gain_strength: float
    lightshift_scale: float
    absorption_ratio: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            if not math.isfinite(getattr(self, f.name)):
                raise ArgumentError(f"{f.name} must be finite")
        if self.cell_length <= 0:
            raise ArgumentError("cell_length must be > 0")
        if self.raman_width <= 0:
            raise ArgumentError("raman_width must be > 0")
        if self.optical_depth <= 0:
            raise ArgumentError("optical_depth must be > 0")
        if self.one_photon_detuning == 0:
            raise ArgumentError("one_photon_detuning must be nonzero")

    @classmethod
    def default(cls, **overrides) -> "MediumParams":
        """Reference medium conditions plus the shipped fitted backend parameters."""
        text = resources.files("fwmsqueeze").joinpath("data/langevin_defaults.ini").read_text()
        return cls.from_ini_text(text, **overrides)

    @classmethod
    def from_ini_text(cls, text: str, section: str = "medium", **overrides) -> "MediumParams":
        cp = configparser.ConfigParser()
        cp.read_string(text)
        values = {k: float(v) for k, v in cp[section].items() if k in {f.name for f in fields(cls)}}
        values.update(overrides)
        return cls(**values)

    def to_ini_text(self, section: str = "medium", header: str = "") -> str:
        lines = [f"# {line}" for line in header.splitlines()] if header else []
        lines.append(f"[{section}]")
        lines += [f"{k} = {v!r}" for k, v in asdict(self).items()]
        return "\n".join(lines) + "\n"

    def with_(self, **changes) -> "MediumParams":
        return replace(self, **changes)

    @property
    def coupling_scale(self) -> float:
        return (
            (self.optical_depth / REFERENCE_OPTICAL_DEPTH)
            * (self.pump_power / REFERENCE_PUMP_MW)
            * (REFERENCE_DETUNING_GHZ / self.one_photon_detuning) ** 2
        )


def ab_phenomenological(params: MediumParams, delta):
    """Coefficients (A, B) in 1/m at two-photon detuning(s) ``delta`` (MHz).

    With the normalized line shape l = (w/2) / ((w/2) - i (delta - center)):

    * B = (g / L) * l, a complex Lorentzian (gain and its dispersion).
    * A = -absorption_ratio * |B| + i (s |l|^4 - g Im l) / L: a light shift
      that offsets the reactive part of B and adds a bump falling off as
      (delta - center)^-4.

    g and s are ``gain_strength`` and ``lightshift_scale`` times
    :attr:`MediumParams.coupling_scale`; L is ``cell_length``.
    """
    delta = np.asarray(delta, dtype=float)
    half = 0.5 * params.raman_width
    line = half / (half - 1j * (delta - params.raman_center))
    scale = params.coupling_scale
    gain = params.gain_strength * scale
    shift = params.lightshift_scale * scale
    length = params.cell_length
    B = gain * line / length
    A = -params.absorption_ratio * np.abs(B) + 1j * (shift * np.abs(line) ** 4 - gain * line.imag) / length
    return A, B


@dataclass(frozen=True)
class CoefficientProfile:
    """A(delta), B(delta) in 1/m on a strictly increasing detuning grid; linear interpolation."""

    grid: np.ndarray
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        A = np.asarray(self.A, dtype=complex)
        B = np.asarray(self.B, dtype=complex)
        if not grid.shape == A.shape == B.shape or grid.ndim != 1 or grid.size == 0:
            raise DataError("grid, A and B must be non-empty and of equal length")
        if not (np.all(np.isfinite(grid)) and np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
            raise DataError("coefficient profile contains non-finite entries")
        if np.any(np.diff(grid) <= 0):
            raise DataError("detuning grid not strictly increasing", row=int(np.argmax(np.diff(grid) <= 0)) + 1)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @classmethod
    def from_params(cls, params: MediumParams, grid) -> "CoefficientProfile":
        A, B = ab_phenomenological(params, grid)
        return cls(grid, A, B)

    def at(self, delta):
        delta = np.asarray(delta, dtype=float)
        lo, hi = self.grid[0], self.grid[-1]
        if np.any(delta < lo) or np.any(delta > hi):
            raise RangeError(f"detuning outside tabulated range [{lo:g}, {hi:g}] MHz")

        def interp(values):
            return np.interp(delta, self.grid, values.real) + 1j * np.interp(delta, self.grid, values.imag)

        return interp(self.A), interp(self.B)


def ab_tabulated(path) -> CoefficientProfile:
    """Read a coefficient CSV (``delta_mhz,re_A,im_A,re_B,im_B``; ``#`` comments allowed)."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [(n, line) for n, line in enumerate(fh, start=1) if line.strip() and not line.lstrip().startswith("#")]
    if not lines:
        raise DataError(f"{path}: no header")
    header_line, header = lines[0]
    names = [h.strip() for h in next(csv.reader([header]))]
    missing = [c for c in COEFFICIENT_COLUMNS if c not in names]
    if missing:
        raise DataError(f"{path}: missing column(s) {', '.join(missing)}", row=header_line)
    cols = [names.index(c) for c in COEFFICIENT_COLUMNS]
    for n, line in lines[1:]:
        cells = next(csv.reader([line]))
        try:
            rows.append([float(cells[c]) for c in cols])
        except (ValueError, IndexError):
            raise DataError(f"{path}: malformed row {line.strip()!r}", row=n) from None
        if not all(math.isfinite(v) for v in rows[-1]):
            raise DataError(f"{path}: non-finite value", row=n)
        if len(rows) > 1 and rows[-1][0] <= rows[-2][0]:
            raise DataError(f"{path}: delta_mhz not strictly increasing", row=n)
    if not rows:
        raise DataError(f"{path}: no data rows")
    data = np.array(rows)
    return CoefficientProfile(data[:, 0], data[:, 1] + 1j * data[:, 2], data[:, 3] + 1j * data[:, 4])


def coefficient_rows(profile: CoefficientProfile):
    yield COEFFICIENT_COLUMNS
    for d, a, b in zip(profile.grid, profile.A, profile.B):
        yield tuple(repr(float(x)) for x in (d, a.real, a.imag, b.real, b.imag))


def _cosh_sinhc(lam2, length):
    """cosh(lam L) and sinh(lam L)/lam for real lam2 = lam**2 of either sign."""
    lam2 = np.asarray(lam2, dtype=float)
    root = np.sqrt(np.abs(lam2))
    x = root * length
    safe = np.where(x > 0, x, 1.0)
    pos = lam2 >= 0
    cosh = np.where(pos, np.cosh(x), np.cos(x))
    ratio = np.where(pos, np.sinh(safe) / safe, np.sin(safe) / safe)
    ratio = np.where(x > 0, ratio, 1.0)
    return cosh, ratio * length


def propagate(A, B, alpha0, length):
    """Exact field after ``length`` m, via the exponential of the 2x2 propagation matrix.

    The matrix equals Re(A) I + N with N traceless and N^2 = (|B|^2 - Im(A)^2) I,
    hence exp(N L) = cosh(lam L) I + sinh(lam L)/lam N.
    """
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    alpha0 = np.asarray(alpha0, dtype=complex)
    if length < 0:
        raise ArgumentError("length must be >= 0")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B)) and np.all(np.isfinite(alpha0))):
        raise ArgumentError("non-finite propagation input")
    lam2 = np.abs(B) ** 2 - A.imag**2
    c, s = _cosh_sinhc(lam2, length)
    out = np.exp(A.real * length) * (c * alpha0 + s * (1j * A.imag * alpha0 + B * np.conj(alpha0)))
    return complex(out) if out.ndim == 0 else out


def phase_rate(A, B, phi):
    """d phi / dz for the amplitude phase phi."""
    return A.imag + B.imag * np.cos(2 * phi) - B.real * np.sin(2 * phi)


def phase_evolution(A, B, phi0, length, steps: int = DEFAULT_STEPS):
    """Integrate the phase equation over ``length`` with fixed-step classical RK4.

    Broadcasts over array-valued ``A``, ``B`` and ``phi0``. The result is not
    wrapped.
    """
    if int(steps) != steps or steps < 1:
        raise ArgumentError("steps must be a positive integer")
    if length < 0:
        raise ArgumentError("length must be >= 0")
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    phi = np.asarray(phi0, dtype=float) + np.zeros(np.broadcast(A, B).shape)
    if not np.all(np.isfinite(phi)) or not np.all(np.isfinite(A)) or not np.all(np.isfinite(B)):
        raise ArgumentError("non-finite phase-evolution input")
    h = length / steps
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(int(steps)):
            k1 = phase_rate(A, B, phi)
            k2 = phase_rate(A, B, phi + 0.5 * h * k1)
            k3 = phase_rate(A, B, phi + 0.5 * h * k2)
            k4 = phase_rate(A, B, phi + h * k3)
            phi = phi + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            if not np.all(np.isfinite(phi)):
                raise NumericalError(f"non-finite phase at z = {(n + 1) * h:.6g} m")
    return float(phi) if phi.ndim == 0 else phi


@dataclass(frozen=True)
class PhaseSweep:
    """Output phase phi_alpha(delta) (rad), continuous across the detuning grid."""

    delta: np.ndarray
    phi: np.ndarray
    phi0: float = 0.0

    @property
    def shift(self) -> np.ndarray:
        return self.phi - self.phi0

    def at(self, delta):
        delta = np.asarray(delta, dtype=float)
        lo, hi = self.delta[0], self.delta[-1]
        if np.any(delta < lo - 1e-9) or np.any(delta > hi + 1e-9):
            bad = np.ravel(delta)[np.argmax(np.ravel((delta < lo - 1e-9) | (delta > hi + 1e-9)))]
            raise RangeError(f"sideband at {bad:g} MHz outside phase sweep [{lo:g}, {hi:g}] MHz")
        return np.interp(delta, self.delta, self.phi)

    def as_dphi(self):
        """Callable ``dphi(delta, omega_a)`` for the phase model."""
        return lambda delta, omega_a: dphi_for_phase_model(self, delta, omega_a)


Source = Union[MediumParams, CoefficientProfile]


def phase_shift_sweep(source: Source, delta_grid, phi0: float = 0.0, length=None, steps: int = DEFAULT_STEPS) -> PhaseSweep:
    """phi_alpha at the cell output for every detuning in ``delta_grid``.

    ``length`` defaults to ``cell_length`` for parameter sources and is
    required for tabulated profiles. Adjacent results are placed on the
    nearest 2 pi branch of their predecessor.
    """
    delta_grid = np.asarray(delta_grid, dtype=float)
    if isinstance(source, MediumParams):
        A, B = ab_phenomenological(source, delta_grid)
        length = source.cell_length if length is None else length
    else:
        if length is None:
            raise ArgumentError("length is required with a tabulated coefficient profile")
        A, B = source.at(delta_grid)
    phi = np.atleast_1d(phase_evolution(A, B, phi0, length, steps))
    return PhaseSweep(delta_grid, np.unwrap(phi), float(phi0))


def dphi_for_phase_model(sweep: PhaseSweep, delta, omega_a):
    """Phase difference phi_alpha(delta + omega_a) - phi_alpha(delta - omega_a) between the sidebands."""
    omega_a = np.asarray(omega_a, dtype=float)
    out = sweep.at(delta + omega_a) - sweep.at(delta - omega_a)
    return float(out) if np.ndim(out) == 0 else out


def write_coefficients(profile: CoefficientProfile, path) -> None:
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        csv.writer(fh, lineterminator="\n").writerows(coefficient_rows(profile))

"""End-to-end steps shared by the CLI and the acceptance tests.

A measured trace holds N(a, delta) = [g(delta + a) + g(delta - a)] / 2, so
the shift-and-add deconvolution is fed 2 N(a, delta).
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

from .core import Curve, NoiseTrace, SqueezingSpectrum, linear_to_db, lower_envelope, snlf, synthesize_spectrum
from .deconvolution import DeconvolutionConfig, deconvolve_with_diagnostics
from .errors import DataError, FwmSqueezeError
from .phase_model import PhaseResolvedNoise, build_phase_resolved, n_min, scanned_spectrum

# largest negative half-swing (relative to the mean) treated as deconvolution noise
NEGATIVE_SWING_TOL = 1e-2


@contextmanager
def stage(module: str):
    """Tag any package error raised inside with the module it came from."""
    try:
        yield
    except FwmSqueezeError as exc:
        if getattr(exc, "module", "fwmsqueeze") == "fwmsqueeze":
            exc.module = module
        raise


@dataclass(frozen=True)
class ZeroFrequencyResult:
    trace: NoiseTrace
    imag_residue: float
    clipped_swing: float


def zero_frequency_trace(trace: NoiseTrace, cfg: DeconvolutionConfig = DeconvolutionConfig()) -> ZeroFrequencyResult:
    """Both channels at zero analysis frequency.

    The channel mean and half-difference are deconvolved separately; the
    half-difference is non-negative by construction of the channels, so
    slightly negative values (deconvolution ripple where both channels sit at
    shot noise) are clipped to zero. ``clipped_swing`` reports the largest
    clipped amount relative to the local mean.
    """
    if cfg.shift_a != trace.analysis_frequency:
        cfg = DeconvolutionConfig(trace.analysis_frequency, cfg.regularization_eps, cfg.taper, cfg.pad_factor)
    with stage("deconvolution"):
        mean, r1 = deconvolve_with_diagnostics(Curve(trace.grid, trace.n_max + trace.n_min), cfg)
        swing, r2 = deconvolve_with_diagnostics(Curve(trace.grid, trace.n_max - trace.n_min), cfg)
    clipped = float(np.max(np.maximum(-swing.values, 0.0) / mean.values))
    if clipped > NEGATIVE_SWING_TOL:
        raise DataError(f"deconvolved max channel falls below min channel by {clipped:.3g} relative")
    half = np.maximum(swing.values, 0.0)
    low = mean.values - half
    if np.any(low <= 0):
        row = int(np.argmax(low <= 0))
        raise DataError(f"deconvolved noise is not positive at delta={mean.grid[row]:g} MHz", row=row)
    zero = NoiseTrace(mean.grid, low, mean.values + half, 0.0)
    return ZeroFrequencyResult(zero, max(r1, r2), clipped)


def phase_resolved(trace: NoiseTrace, cfg: DeconvolutionConfig = DeconvolutionConfig()) -> PhaseResolvedNoise:
    """Zero-frequency (N+, N-) from a trace measured at its analysis frequency."""
    if trace.analysis_frequency > 0:
        trace = zero_frequency_trace(trace, cfg).trace
    with stage("phase-model"):
        return build_phase_resolved(trace)


def min_spectrum(trace: NoiseTrace, delta: float, omega_grid, cfg: DeconvolutionConfig = DeconvolutionConfig()) -> SqueezingSpectrum:
    """Minimum-phase squeezing spectrum synthesized from a measured trace."""
    zero = zero_frequency_trace(trace, cfg).trace if trace.analysis_frequency > 0 else trace
    with stage("core-model"):
        return synthesize_spectrum(zero.min_curve, delta, omega_grid)


@dataclass(frozen=True)
class SnlfRow:
    delta: float
    snlf: float | None
    spectrum: SqueezingSpectrum
    envelope: SqueezingSpectrum

    @property
    def snlf_plus_delta(self):
        return None if self.snlf is None else self.snlf + self.delta


def snlf_table(
    trace: NoiseTrace,
    deltas,
    omega_grid,
    cfg: DeconvolutionConfig = DeconvolutionConfig(),
    envelope: str = "direct",
    dphi=0.0,
    scan_period: float = 0.5,
    window: float = 1.0,
    cutoff: float = 0.2,
) -> list:
    """SNLF for each detuning.

    ``envelope="direct"`` reads the SNLF off the synthesized minimum-phase
    spectrum. ``envelope="scanned"`` first simulates a spectrum recorded with
    the LO phase ramping (period ``scan_period`` MHz) and extracts its lower
    envelope, as done with a phase-scanned measurement.
    """
    zero = zero_frequency_trace(trace, cfg).trace if trace.analysis_frequency > 0 else trace
    p = None
    rows = []
    for delta in deltas:
        with stage("core-model"):
            if envelope == "direct":
                spec = synthesize_spectrum(zero.min_curve, delta, omega_grid)
                env = spec
            else:
                if p is None:
                    with stage("phase-model"):
                        p = build_phase_resolved(zero)
                with stage("phase-model"):
                    spec = scanned_spectrum(p, omega_grid, delta, dphi, scan_period)
                env = lower_envelope(spec, window=window, cutoff=cutoff)
            value = snlf(env)
        rows.append(SnlfRow(float(delta), value, spec, env))
    return rows


def snlf_spread(rows) -> float:
    """max - min of SNLF + delta over rows that show squeezing."""
    values = [r.snlf_plus_delta for r in rows if r.snlf is not None and math.isfinite(r.snlf)]
    return max(values) - min(values) if values else math.nan


def min_over_phase_spectrum(p: PhaseResolvedNoise, delta: float, omega_grid, dphi) -> SqueezingSpectrum:
    with stage("phase-model"):
        return SqueezingSpectrum(np.asarray(omega_grid), linear_to_db(n_min(p, omega_grid, delta, dphi).noise), delta)

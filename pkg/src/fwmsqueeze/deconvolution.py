"""Recover the zero-analysis-frequency noise curve from a trace measured at omega_a = a.

The measurement obeys f(delta) = g(delta + a) + g(delta - a). In the
conjugate variable t (cycles per MHz) this is f~(t) = 2 cos(2 pi a t) g~(t),
so g follows from a division by the kernel. The kernel vanishes at
t = (2k + 1) / (4a); the division is regularized there as
cos / (2 (cos^2 + eps)).

Traces are not periodic, so before transforming the linear baseline through
the two end points is removed (a line is its own shift-and-add image up to a
factor 2, so it is restored exactly afterwards), the remainder is tapered and
zero padded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import windows

from .core import Curve
from .errors import ArgumentError

# kernel values below this are treated as exact zeros when eps == 0
_KERNEL_FLOOR = 1e-8
_SHIFT_RTOL = 1e-9


@dataclass(frozen=True)
class DeconvolutionConfig:
    """Settings for :func:`deconvolve`.

    ``taper`` is ``"tukey"`` (raised cosine over 10% of the span at each
    end), ``"tukey:<fraction>"`` with an explicit per-side fraction, or
    ``"none"``.
    """

    shift_a: float = 1.0
    regularization_eps: float = 1e-3
    taper: str = "tukey"
    pad_factor: int = 4

    def __post_init__(self):
        if not (math.isfinite(self.shift_a) and self.shift_a > 0):
            raise ArgumentError(f"shift_a must be > 0, got {self.shift_a}")
        if not (math.isfinite(self.regularization_eps) and self.regularization_eps >= 0):
            raise ArgumentError(f"regularization_eps must be >= 0, got {self.regularization_eps}")
        if int(self.pad_factor) != self.pad_factor or not 1 <= self.pad_factor <= 16:
            raise ArgumentError(f"pad_factor must be an integer in [1, 16], got {self.pad_factor}")
        taper_fraction(self.taper)


def taper_fraction(taper: str) -> float:
    """Per-side fraction of the span covered by the raised-cosine taper."""
    name, _, arg = taper.partition(":")
    if name == "none" and not arg:
        return 0.0
    if name == "tukey":
        frac = float(arg) if arg else 0.1
        if not 0 <= frac <= 0.5:
            raise ArgumentError(f"taper fraction must lie in [0, 0.5], got {frac}")
        return frac
    raise ArgumentError(f"unknown taper {taper!r}")


def shift_steps(spacing: float, a: float) -> int:
    """Number of grid steps in a shift ``a``; ArgumentError if not an integer."""
    ratio = a / spacing
    steps = int(round(ratio))
    if steps < 1 or abs(ratio - steps) > _SHIFT_RTOL * max(1.0, ratio):
        raise ArgumentError(f"shift {a:g} MHz is not a multiple of the grid spacing {spacing:g} MHz")
    return steps


def forward_model(g: Curve, a: float) -> Curve:
    """Shift-and-add image f(delta) = g(delta + a) + g(delta - a).

    Returned on the interior grid where both shifted samples exist. No factor
    1/2 is applied here.
    """
    k = shift_steps(g.spacing, a)
    if g.grid.size <= 2 * k:
        raise ArgumentError(f"grid spanning {g.grid[-1] - g.grid[0]:g} MHz too short for shift {a:g} MHz")
    values = g.values[2 * k:] + g.values[: g.grid.size - 2 * k]
    return Curve(g.grid[k: g.grid.size - k], values)


def _baseline(curve: Curve, x=None) -> np.ndarray:
    x = curve.grid if x is None else x
    x0, x1 = curve.grid[0], curve.grid[-1]
    y0, y1 = curve.values[0], curve.values[-1]
    return y0 + (y1 - y0) * (x - x0) / (x1 - x0)


def resample_for_shift(f: Curve, a: float) -> Curve:
    """Band-limited resampling of ``f`` onto a grid whose spacing divides ``a``.

    Returns ``f`` unchanged when ``a`` is already a multiple of its spacing.
    The baseline-free remainder is interpolated with a Whittaker-Shannon sum.
    """
    d = f.spacing
    ratio = a / d
    if abs(ratio - round(ratio)) <= _SHIFT_RTOL * max(1.0, ratio) and round(ratio) >= 1:
        return f
    steps = max(1, math.ceil(ratio))
    new_d = a / steps
    span = f.grid[-1] - f.grid[0]
    n_new = int(math.floor(span / new_d + 1e-9)) + 1
    x_new = f.grid[0] + new_d * np.arange(n_new)
    rest = f.values - _baseline(f)
    u = (x_new - f.grid[0]) / d
    k = np.arange(f.grid.size)
    out = np.empty(n_new)
    for start in range(0, n_new, 512):
        chunk = u[start: start + 512]
        out[start: start + 512] = np.sinc(chunk[:, None] - k[None, :]) @ rest
    return Curve(x_new, out + _baseline(f, x_new))


def _kernel_inverse(t: np.ndarray, a: float, eps: float) -> np.ndarray:
    c = np.cos(2 * np.pi * a * t)
    if eps > 0:
        return c / (2 * (c * c + eps))
    inv = np.zeros_like(c)
    ok = np.abs(c) > _KERNEL_FLOOR
    inv[ok] = 1.0 / (2 * c[ok])
    return inv


def deconvolve_with_diagnostics(f: Curve, cfg: DeconvolutionConfig = DeconvolutionConfig()):
    """As :func:`deconvolve`, also returning the imaginary residue.

    The residue is ||Im g|| / ||g|| of the inverse transform before the real
    part is taken.
    """
    if not np.all(np.isfinite(f.values)):
        raise ArgumentError("input curve contains NaN or infinite values")
    a = cfg.shift_a
    f = resample_for_shift(f, a)
    d = f.spacing
    n = f.grid.size
    k = shift_steps(d, a)
    if n <= 2 * k + 1:
        raise ArgumentError(
            f"grid spanning {f.grid[-1] - f.grid[0]:g} MHz cannot resolve the kernel of shift {a:g} MHz"
        )

    base = _baseline(f)
    rest = f.values - base
    frac = taper_fraction(cfg.taper)
    if frac > 0:
        rest = rest * windows.tukey(n, alpha=2 * frac)

    n_pad = n * int(cfg.pad_factor)
    spectrum = np.fft.fft(rest, n=n_pad, norm="ortho")
    t = np.fft.fftfreq(n_pad, d=d)
    g_pad = np.fft.ifft(spectrum * _kernel_inverse(t, a, cfg.regularization_eps), norm="ortho")[:n]

    g = g_pad.real + 0.5 * base
    norm = np.linalg.norm(g)
    residue = float(np.linalg.norm(g_pad.imag) / norm) if norm > 0 else 0.0
    return Curve(f.grid.copy(), g), residue


def deconvolve(f: Curve, cfg: DeconvolutionConfig = DeconvolutionConfig()) -> Curve:
    """Invert the shift-and-add relation f(delta) = g(delta + a) + g(delta - a).

    ``f`` must be in linear units on a uniform grid and level off towards its
    end points. A constant 2c maps to c. If the shift is not a multiple of the
    grid spacing the result lives on a resampled grid.
    """
    return deconvolve_with_diagnostics(f, cfg)[0]


def roundtrip_residual(f: Curve, cfg: DeconvolutionConfig = DeconvolutionConfig()) -> float:
    """Relative RMS error ||forward_model(deconvolve(f)) - f|| / ||f|| on the interior."""
    g = deconvolve(f, cfg)
    f_rs = resample_for_shift(f, cfg.shift_a)
    back = forward_model(g, cfg.shift_a)
    k = shift_steps(f_rs.spacing, cfg.shift_a)
    ref = f_rs.values[k: f_rs.grid.size - k]
    return float(np.linalg.norm(back.values - ref) / np.linalg.norm(ref))

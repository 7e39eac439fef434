"""Static SVG figures (no display needed)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# deterministic SVG ids
plt.rcParams["svg.hashsalt"] = "fwmsqueeze"


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _shot_noise(ax):
    ax.axhline(0.0, color="k", lw=0.8)


def plot_trace(path, trace, zero=None):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(trace.grid, trace.n_max_db, "s", ms=2, color="k", label=f"max phase, {trace.analysis_frequency:g} MHz")
    ax.plot(trace.grid, trace.n_min_db, "o", ms=2, color="tab:red", label=f"min phase, {trace.analysis_frequency:g} MHz")
    if zero is not None:
        ax.plot(zero.grid, zero.n_min_db, color="tab:blue", label="min phase, 0 MHz (deconvolved)")
    _shot_noise(ax)
    ax.set_xlabel("two-photon detuning (MHz)")
    ax.set_ylabel("noise (dB re shot noise)")
    ax.legend(fontsize=8)
    _save(fig, path)


def plot_spectra(path, spectra, envelopes=None):
    fig, ax = plt.subplots(figsize=(6, 4))
    for i, spec in enumerate(spectra):
        line, = ax.plot(spec.grid, spec.noise_db, lw=0.8 if envelopes else 1.5, label=f"delta = {spec.delta:g} MHz")
        if envelopes:
            ax.plot(envelopes[i].grid, envelopes[i].noise_db, "--", color=line.get_color())
    _shot_noise(ax)
    ax.set_xlabel("analysis frequency (MHz)")
    ax.set_ylabel("noise (dB re shot noise)")
    ax.legend(fontsize=8)
    _save(fig, path)


def plot_snlf(path, rows):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    d = [r.delta for r in rows if r.snlf is not None]
    s = [r.snlf for r in rows if r.snlf is not None]
    ax.plot(d, s, "o-", label="SNLF")
    ax.plot(d, np.add(d, s), "s--", label="SNLF + delta")
    ax.set_xlabel("two-photon detuning (MHz)")
    ax.set_ylabel("frequency (MHz)")
    ax.legend(fontsize=8)
    _save(fig, path)


def plot_phase_compare(path, comparisons):
    fig, axes = plt.subplots(len(comparisons), 1, figsize=(6, 3 * len(comparisons)), squeeze=False)
    for ax, c in zip(axes[:, 0], comparisons):
        ax.plot(c.omega, c.n_min_db, color="k", label="minimum over LO phase")
        ax.plot(c.omega, c.n_locked_db, color="tab:blue", label="LO phase locked")
        _shot_noise(ax)
        ax.set_title(f"delta = {c.delta:g} MHz", fontsize=9)
        ax.set_xlabel("analysis frequency (MHz)")
        ax.set_ylabel("noise (dB)")
        ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def plot_sweep(path, sweep):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(sweep.delta, sweep.shift / np.pi)
    ax.set_xlabel("two-photon detuning (MHz)")
    ax.set_ylabel("phase shift (units of pi)")
    _save(fig, path)

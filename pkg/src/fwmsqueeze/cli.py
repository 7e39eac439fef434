"""Command-line interface: ``fwmsqueeze <subcommand> [--config run.ini] [--out DIR]``.

Subcommands
-----------
deconvolve       zero-frequency noise curves from the input trace
spectrum         synthesized minimum-phase squeezing spectra
snlf-table       shot-noise-limit frequency for each detuning
phase-compare    minimum-over-phase vs. LO-locked spectra
langevin-sweep   propagation phase shift versus two-photon detuning

Each writes CSV file(s) and an SVG figure into the output directory. Output
files appear only if the whole subcommand succeeds.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import plotting
from .core import Curve, NoiseTrace
from .deconvolution import DeconvolutionConfig, roundtrip_residual
from .errors import FwmSqueezeError
from .io import (
    load_config,
    parse_angle,
    phase_comparison_rows,
    snlf_rows,
    spectrum_rows,
    staged_outputs,
    sweep_rows,
    trace_rows,
    load_noise_trace,
)
from .langevin import CoefficientProfile, ab_tabulated, coefficient_rows, phase_shift_sweep
from .phase_model import compare_phases
from .pipeline import min_spectrum, phase_resolved, snlf_spread, snlf_table, stage, zero_frequency_trace

log = logging.getLogger("fwmsqueeze")


def _deconv_cfg(cfg) -> DeconvolutionConfig:
    return DeconvolutionConfig(cfg.shift_a, cfg.eps, cfg.taper, cfg.pad_factor)


def _trace(cfg) -> NoiseTrace:
    with stage("cli-io"):
        return load_noise_trace(Path(str(cfg.trace)), analysis_frequency=cfg.shift_a)


def _tag(value: float) -> str:
    return format(value, "g")


def cmd_deconvolve(cfg, args):
    trace = _trace(cfg)
    dcfg = _deconv_cfg(cfg)
    result = zero_frequency_trace(trace, dcfg)
    with stage("deconvolution"):
        residual = roundtrip_residual(Curve(trace.grid, 2 * trace.n_min), dcfg)
    with staged_outputs(cfg.out) as out:
        out.write_rows("zero_frequency.csv", trace_rows(result.trace))
        plotting.plot_trace(out.path("zero_frequency.svg"), trace, result.trace)
    print(f"round-trip residual (min channel): {residual:.3e}")
    print(f"imaginary residue: {result.imag_residue:.3e}; clipped swing: {result.clipped_swing:.3e}")


def cmd_spectrum(cfg, args):
    trace = _trace(cfg)
    spectra = [min_spectrum(trace, d, cfg.omega_grid, _deconv_cfg(cfg)) for d in cfg.deltas]
    with staged_outputs(cfg.out) as out:
        for spec in spectra:
            out.write_rows(f"spectrum_delta_{_tag(spec.delta)}.csv", spectrum_rows(spec))
        plotting.plot_spectra(out.path("spectra.svg"), spectra)


def cmd_snlf_table(cfg, args):
    trace = _trace(cfg)
    rows = snlf_table(
        trace,
        cfg.deltas,
        cfg.omega_grid,
        _deconv_cfg(cfg),
        envelope=cfg.envelope,
        dphi=cfg.dphi if cfg.dphi_mode == "scalar" else 0.0,
        scan_period=cfg.scan_period,
        window=cfg.envelope_window,
        cutoff=cfg.envelope_cutoff,
    )
    with staged_outputs(cfg.out) as out:
        out.write_rows("snlf_table.csv", snlf_rows((r.delta, r.snlf) for r in rows))
        for r in rows:
            out.write_rows(f"envelope_delta_{_tag(r.delta)}.csv", spectrum_rows(r.envelope))
        plotting.plot_spectra(
            out.path("snlf_table.svg"),
            [r.spectrum for r in rows],
            [r.envelope for r in rows] if cfg.envelope == "scanned" else None,
        )
    for r in rows:
        s = "no squeezing" if r.snlf is None else f"{r.snlf:8.3f}  (SNLF+delta {r.snlf_plus_delta:.3f})"
        print(f"delta {r.delta:7.2f} MHz  SNLF {s}")
    print(f"SNLF+delta spread: {snlf_spread(rows):.3f} MHz")


def _dphi_source(cfg, deltas):
    if cfg.dphi_mode == "scalar":
        return cfg.dphi
    span = cfg.omega_max + max(cfg.lock_omega, 0.0)
    lo, hi = min(deltas) - span, max(deltas) + span
    grid = np.round(np.arange(lo, hi + cfg.delta_step / 2, cfg.delta_step), 12)
    with stage("heisenberg-langevin"):
        if cfg.coefficients is not None:
            sweep = phase_shift_sweep(ab_tabulated(cfg.coefficients), grid, cfg.phi0, cfg.medium.cell_length, cfg.steps)
        else:
            sweep = phase_shift_sweep(cfg.medium, grid, cfg.phi0, steps=cfg.steps)
    return sweep.as_dphi()


def cmd_phase_compare(cfg, args):
    trace = _trace(cfg)
    deltas = cfg.deltas if args.delta else [-4.0, -20.0]
    p = phase_resolved(trace, _deconv_cfg(cfg))
    dphi = _dphi_source(cfg, deltas)
    with stage("phase-model"):
        comparisons = [compare_phases(p, cfg.omega_grid, d, dphi, cfg.lock_omega) for d in deltas]
    with staged_outputs(cfg.out) as out:
        for c in comparisons:
            out.write_rows(f"phase_compare_delta_{_tag(c.delta)}.csv", phase_comparison_rows(c))
        plotting.plot_phase_compare(out.path("phase_compare.svg"), comparisons)
    for c in comparisons:
        gap = c.gap_db
        print(f"delta {c.delta:7.2f} MHz  phi1 {c.phi1 / math.pi:.4f} pi  max locked-minus-min gap {gap.max():.3f} dB")


def cmd_langevin_sweep(cfg, args):
    grid = cfg.delta_grid
    with stage("heisenberg-langevin"):
        if cfg.coefficients is not None:
            source = ab_tabulated(cfg.coefficients)
            sweep = phase_shift_sweep(source, grid, cfg.phi0, cfg.medium.cell_length, cfg.steps)
            profile = source
        else:
            sweep = phase_shift_sweep(cfg.medium, grid, cfg.phi0, steps=cfg.steps)
            profile = CoefficientProfile.from_params(cfg.medium, grid)
    with staged_outputs(cfg.out) as out:
        out.write_rows("phase_sweep.csv", sweep_rows(sweep))
        out.write_rows("coefficients.csv", coefficient_rows(profile))
        plotting.plot_sweep(out.path("phase_sweep.svg"), sweep)
    i = int(np.argmax(sweep.shift))
    print(f"peak shift {sweep.shift[i] / math.pi:.4f} pi at delta = {sweep.delta[i]:g} MHz")


COMMANDS = {
    "deconvolve": cmd_deconvolve,
    "spectrum": cmd_spectrum,
    "snlf-table": cmd_snlf_table,
    "phase-compare": cmd_phase_compare,
    "langevin-sweep": cmd_langevin_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fwmsqueeze", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="INI run configuration")
        p.add_argument("--out", type=Path, help="output directory (default: ./out)")
        p.add_argument("--delta", type=float, action="append", help="two-photon detuning in MHz (repeatable)")
        p.add_argument("--dphi", help="sideband phase shift, radians or e.g. 0.2pi")
        p.add_argument("--eps", type=float, help="deconvolution regularization")
        p.add_argument("--lock-omega", type=float, help="lock analysis frequency in MHz")
        p.add_argument("--seed", type=int, help="reserved; no stochastic steps use it")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        overrides = dict(
            out=args.out,
            deltas=args.delta,
            eps=args.eps,
            lock_omega=args.lock_omega,
            dphi=parse_angle(args.dphi) if args.dphi is not None else None,
        )
        with stage("cli-io"):
            cfg = load_config(args.config, **overrides)
        log.info("running %s, output in %s", args.command, cfg.out)
        COMMANDS[args.command](cfg, args)
    except FwmSqueezeError as exc:
        print(f"fwmsqueeze: error in {exc.module}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

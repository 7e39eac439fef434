"""CSV formats, run configuration and atomic output files."""

from __future__ import annotations

import configparser
import csv
import math
import os
import re
import tempfile
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .core import NoiseTrace, SqueezingSpectrum
from .errors import ArgumentError, DataError
from .fixtures import fixture_path
from .langevin import MediumParams, PhaseSweep

TRACE_COLUMNS = ("delta_mhz", "noise_min_db", "noise_max_db")
SPECTRUM_COLUMNS = ("omega_mhz", "noise_db")
SNLF_COLUMNS = ("delta_mhz", "snlf_mhz", "snlf_plus_delta_mhz")
PHASE_COMPARE_COLUMNS = ("omega_mhz", "n_min_db", "n_locked_db")
SWEEP_COLUMNS = ("delta_mhz", "phi_rad", "shift_rad")

_META_RE = re.compile(r"#\s*([A-Za-z_][\w]*)\s*[:=]\s*(\S+)\s*$")


def fmt(x) -> str:
    """Fixed formatting for every float written to CSV (round-trips to ~1e-12)."""
    x = float(x)
    if math.isnan(x):
        return "none"
    return format(x, ".12g")


@dataclass
class Table:
    columns: dict
    rows: list
    meta: dict = field(default_factory=dict)

    def __getitem__(self, name):
        return self.columns[name]


def read_table(path, required, optional=()) -> Table:
    """Parse a comma-separated file with a header row.

    Lines starting with ``#`` are comments; ``# key: value`` comments before
    the header are collected as metadata. Cells reading ``none`` become NaN.
    Errors name the 1-based line number.
    """
    path = Path(path)
    meta = {}
    header = None
    data = []
    line_numbers = []
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror}") from None
    with fh:
        for n, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            if text.startswith("#"):
                m = _META_RE.match(text)
                if m and header is None:
                    meta[m.group(1)] = m.group(2)
                continue
            cells = [c.strip() for c in next(csv.reader([text]))]
            if header is None:
                header = cells
                missing = [c for c in required if c not in header]
                if missing:
                    raise DataError(f"{path}: missing column(s) {', '.join(missing)}", row=n)
                wanted = list(required) + [c for c in optional if c in header]
                idx = [header.index(c) for c in wanted]
                continue
            try:
                values = [math.nan if cells[i].lower() == "none" else float(cells[i]) for i in idx]
            except (ValueError, IndexError):
                raise DataError(f"{path}: malformed row {text!r}", row=n) from None
            data.append(values)
            line_numbers.append(n)
    if header is None:
        raise DataError(f"{path}: no header row")
    arr = np.array(data, dtype=float).reshape(len(data), len(wanted))
    return Table({c: arr[:, i] for i, c in enumerate(wanted)}, line_numbers, meta)


def _check_uniform(table: Table, column: str, path):
    x = table[column]
    if x.size < 2:
        raise DataError(f"{path}: need at least two rows")
    steps = np.diff(x)
    spacing = (x[-1] - x[0]) / (x.size - 1)
    bad = (steps <= 0) | (np.abs(steps - spacing) > 1e-9 * abs(spacing))
    if np.any(bad):
        i = int(np.argmax(bad)) + 1
        raise DataError(f"{path}: {column} not uniformly increasing", row=table.rows[i])


def load_noise_trace(path, analysis_frequency: Optional[float] = None) -> NoiseTrace:
    """Load a ``delta_mhz,noise_min_db,noise_max_db`` file.

    The analysis frequency comes from the argument, else an
    ``# analysis_frequency_mhz: <value>`` comment, else 1 MHz.
    """
    table = read_table(path, TRACE_COLUMNS)
    for name in TRACE_COLUMNS:
        col = table[name]
        if not np.all(np.isfinite(col)):
            raise DataError(f"{path}: non-finite {name}", row=table.rows[int(np.argmax(~np.isfinite(col)))])
    bad = table["noise_min_db"] > table["noise_max_db"]
    if np.any(bad):
        raise DataError(f"{path}: noise_min_db exceeds noise_max_db", row=table.rows[int(np.argmax(bad))])
    _check_uniform(table, "delta_mhz", path)
    if analysis_frequency is None:
        analysis_frequency = float(table.meta.get("analysis_frequency_mhz", 1.0))
    return NoiseTrace.from_db(table["delta_mhz"], table["noise_min_db"], table["noise_max_db"], analysis_frequency)


def trace_rows(trace: NoiseTrace):
    yield [f"# analysis_frequency_mhz: {fmt(trace.analysis_frequency)}"]
    yield TRACE_COLUMNS
    for row in zip(trace.grid, trace.n_min_db, trace.n_max_db):
        yield [fmt(v) for v in row]


def load_spectrum(path) -> SqueezingSpectrum:
    table = read_table(path, SPECTRUM_COLUMNS)
    return SqueezingSpectrum(table["omega_mhz"], table["noise_db"], float(table.meta.get("delta_mhz", 0.0)))


def spectrum_rows(spectrum: SqueezingSpectrum):
    yield [f"# delta_mhz: {fmt(spectrum.delta)}"]
    yield SPECTRUM_COLUMNS
    for row in zip(spectrum.grid, spectrum.noise_db):
        yield [fmt(v) for v in row]


def load_snlf_table(path) -> Table:
    return read_table(path, SNLF_COLUMNS)


def snlf_rows(rows):
    """``rows``: iterable of (delta, snlf or None)."""
    yield SNLF_COLUMNS
    for delta, value in rows:
        value = math.nan if value is None else value
        yield [fmt(delta), fmt(value), fmt(value + delta)]


def load_phase_comparison(path) -> Table:
    return read_table(path, PHASE_COMPARE_COLUMNS)


def phase_comparison_rows(comparison):
    yield [f"# delta_mhz: {fmt(comparison.delta)}"]
    yield [f"# phi1_rad: {fmt(comparison.phi1)}"]
    yield PHASE_COMPARE_COLUMNS
    for row in zip(comparison.omega, comparison.n_min_db, comparison.n_locked_db):
        yield [fmt(v) for v in row]


def load_phase_sweep(path) -> PhaseSweep:
    table = read_table(path, SWEEP_COLUMNS)
    return PhaseSweep(table["delta_mhz"], table["phi_rad"], float(table.meta.get("phi0_rad", 0.0)))


def sweep_rows(sweep: PhaseSweep):
    yield [f"# phi0_rad: {fmt(sweep.phi0)}"]
    yield SWEEP_COLUMNS
    for row in zip(sweep.delta, sweep.phi, sweep.shift):
        yield [fmt(v) for v in row]


class OutputSet:
    """Stage output files and publish them together.

    Each file is written to a temporary sibling and renamed into place only
    when the whole set succeeds; on failure every staged file is removed.
    """

    def __init__(self, directory):
        self.directory = Path(directory)
        self._staged = []

    def path(self, name: str) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=f".{name}.", dir=self.directory)
        os.close(fd)
        self._staged.append((Path(tmp), self.directory / name))
        return Path(tmp)

    def write_rows(self, name: str, rows) -> Path:
        tmp = self.path(name)
        with open(tmp, "w", newline="", encoding="utf-8") as fh:
            csv.writer(fh, lineterminator="\n").writerows(rows)
        return self.directory / name

    def commit(self):
        for tmp, final in self._staged:
            os.replace(tmp, final)
        self._staged = []

    def discard(self):
        for tmp, _ in self._staged:
            tmp.unlink(missing_ok=True)
        self._staged = []

    @property
    def names(self):
        return [final.name for _, final in self._staged]


@contextmanager
def staged_outputs(directory):
    out = OutputSet(directory)
    try:
        yield out
    except BaseException:
        out.discard()
        raise
    out.commit()


def parse_angle(text) -> float:
    """Radians from ``"0.63"``, ``"0.2pi"``, ``"0.2*pi"`` or ``"pi/5"``."""
    s = str(text).strip().lower().replace(" ", "")
    m = re.fullmatch(r"([-+]?[0-9.eE+-]*)\*?pi(?:/([0-9.]+))?", s)
    try:
        if m:
            coef = m.group(1)
            value = (float(coef) if coef not in ("", "+", "-") else float(coef + "1")) * math.pi
            if m.group(2):
                value /= float(m.group(2))
            return value
        return float(s)
    except ValueError:
        raise ArgumentError(f"cannot parse angle {text!r}") from None


def _floats(text) -> list:
    return [float(v) for v in str(text).replace(",", " ").split()]


@dataclass
class RunConfig:
    """Settings for every CLI subcommand; ``configs/run.ini`` lists every key."""

    trace: Path = None
    coefficients: Optional[Path] = None
    shift_a: float = 1.0
    eps: float = 1e-3
    taper: str = "tukey"
    pad_factor: int = 4
    dphi_mode: str = "scalar"
    dphi: float = 0.2 * math.pi
    lock_omega: float = 1.0
    scan_period: float = 0.5
    deltas: list = field(default_factory=lambda: [0.0, -4.0, -12.0, -20.0])
    omega_max: float = 40.0
    omega_step: float = 0.05
    envelope: str = "direct"
    envelope_window: float = 1.0
    envelope_cutoff: float = 0.2
    medium: MediumParams = None
    delta_min: float = -30.0
    delta_max: float = 40.0
    delta_step: float = 0.25
    phi0: float = 0.0
    steps: int = 1000
    out: Path = Path("out")

    def __post_init__(self):
        if self.trace is None:
            self.trace = fixture_path()
        if self.medium is None:
            self.medium = MediumParams.default()
        self.validate()

    def validate(self):
        if isinstance(self.trace, str):
            self.trace = Path(self.trace)
        if not self.trace.is_file():
            raise ArgumentError(f"trace file {self.trace} does not exist")
        if self.coefficients is not None and not Path(self.coefficients).exists():
            raise ArgumentError(f"coefficient file {self.coefficients} does not exist")
        if self.dphi_mode not in ("scalar", "langevin"):
            raise ArgumentError(f"dphi_mode must be 'scalar' or 'langevin', got {self.dphi_mode!r}")
        if self.envelope not in ("direct", "scanned"):
            raise ArgumentError(f"envelope must be 'direct' or 'scanned', got {self.envelope!r}")
        if not self.deltas:
            raise ArgumentError("deltas must not be empty")
        if not (self.omega_max > 0 and self.omega_step > 0 and self.delta_step > 0):
            raise ArgumentError("sweep grids must have positive extent and step")
        if self.delta_max <= self.delta_min:
            raise ArgumentError("delta_max must exceed delta_min")

    @property
    def omega_grid(self) -> np.ndarray:
        n = int(math.floor(self.omega_max / self.omega_step + 1e-9)) + 1
        return np.round(self.omega_step * np.arange(n), 12)

    @property
    def delta_grid(self) -> np.ndarray:
        n = int(math.floor((self.delta_max - self.delta_min) / self.delta_step + 1e-9)) + 1
        return np.round(self.delta_min + self.delta_step * np.arange(n), 12)


_SECTIONS = {
    "input": {"trace": "path", "coefficients": "path"},
    "deconvolution": {"shift_a": float, "eps": float, "taper": str, "pad_factor": int},
    "phase": {"dphi_mode": str, "dphi": parse_angle, "lock_omega": float, "scan_period": float},
    "spectrum": {
        "deltas": _floats,
        "omega_max": float,
        "omega_step": float,
        "envelope": str,
        "envelope_window": float,
        "envelope_cutoff": float,
    },
    "sweep": {"delta_min": float, "delta_max": float, "delta_step": float, "phi0": parse_angle, "steps": int},
    "output": {"dir": "out"},
}


def load_config(path=None, **overrides) -> RunConfig:
    """Read a flat INI file (``[section]`` headers, ``key = value`` lines).

    Relative paths are resolved against the config file's directory. Keyword
    overrides (already parsed) take precedence.
    """
    values = {}
    medium = {}
    if path is not None:
        path = Path(path)
        cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        try:
            with open(path, encoding="utf-8") as fh:
                cp.read_file(fh)
        except OSError as exc:
            raise ArgumentError(f"config {path}: {exc.strerror}") from None
        except configparser.Error as exc:
            raise ArgumentError(f"config {path}: {exc}") from None
        base = path.parent
        for section in cp.sections():
            if section == "medium":
                try:
                    medium = {k: float(v) for k, v in cp[section].items()}
                except ValueError as exc:
                    raise ArgumentError(f"config {path}: [medium] {exc}") from None
                continue
            if section not in _SECTIONS:
                raise ArgumentError(f"config {path}: unknown section [{section}]")
            for key, raw in cp[section].items():
                kind = _SECTIONS[section].get(key)
                if kind is None:
                    raise ArgumentError(f"config {path}: unknown key {key!r} in [{section}]")
                try:
                    if kind == "path":
                        values[key] = (base / raw).resolve()
                    elif kind == "out":
                        values["out"] = (base / raw).resolve()
                    else:
                        values[key] = kind(raw)
                except ValueError:
                    raise ArgumentError(f"config {path}: bad value {raw!r} for {key}") from None
    values.update({k: v for k, v in overrides.items() if v is not None})
    if medium:
        try:
            values["medium"] = MediumParams.default(**medium)
        except TypeError as exc:
            raise ArgumentError(f"config {path}: [medium] {exc}") from None
    return RunConfig(**values)

"""Write the synthetic fig2_like.csv fixture shipped in the package data.

The curves come from fwmsqueeze.fixtures; they are analytic, not measured.

    python scripts/make_fixture.py [--out PATH]
"""

import argparse
import csv
from pathlib import Path

from fwmsqueeze.fixtures import detuning_scan_trace
from fwmsqueeze.io import trace_rows

HEADER = """\
# SYNTHETIC fixture -- not measured data.
# Noise vs two-photon detuning at 1 MHz analysis frequency; min- and max-phase channels in dB re shot noise.
# Built by scripts/make_fixture.py from fwmsqueeze.fixtures.zero_frequency_min/max.
"""


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    default = Path(__file__).resolve().parents[1] / "src" / "fwmsqueeze" / "data" / "fig2_like.csv"
    parser.add_argument("--out", type=Path, default=default)
    args = parser.parse_args(argv)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        fh.write(HEADER)
        csv.writer(fh, lineterminator="\n").writerows(trace_rows(detuning_scan_trace()))
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()

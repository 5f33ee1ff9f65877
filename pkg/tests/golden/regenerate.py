"""Rewrite the golden CLI outputs.  Run from the repository root after an
intended output change and review the diff before committing."""

import contextlib
import io
from pathlib import Path

from spinsqueeze.cli import main

HERE = Path(__file__).parent

CASES = {
    "witness.txt": ["witness", str(HERE / "records.json")],
    "witness.json": ["witness", str(HERE / "records.json"), "--format", "json"],
    "fs_curve_spin2.csv": ["fs-curve", "--spin", "2", "--points", "64"],
    "fs_curve_spin3.csv": ["fs-curve", "--spin", "3", "--points", "16"],
    "bounds_modes.csv": ["bounds", "--modes", "2", "3", "4", "5"],
    "bounds_depth.csv": ["bounds", "--depth", "12", "--pmax", "6"],
    "bounds_depth_grid.csv": ["bounds", "--depth", "8", "--pmax", "4", "--polarization-grid"],
    "split_check.txt": ["split-check", "--spin", "20", "--lambda", "0.01", "--modes", "5"],
}


def run(argv):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(argv)
    return code, buf.getvalue()


if __name__ == "__main__":
    for name, argv in CASES.items():
        code, out = run(argv)
        (HERE / name).write_text(out, encoding="utf-8")
        print(f"{name}: exit {code}, {len(out)} bytes")

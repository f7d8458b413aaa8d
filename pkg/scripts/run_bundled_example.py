#!/usr/bin/env python3
"""Produce the full output set for the bundled 49-layer GaN/AlN example.

Runs the CLI subcommands on the shipped cw and pulsed run configs and
drops CSVs plus the binary joint-amplitude grid under out/.  These files
are also the demo inputs for the figure renderer in frontend/.
"""

import os
import subprocess
import sys

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CW = os.path.join(ROOT, "configs", "run_cw.json")
PULSED = os.path.join(ROOT, "configs", "run_pulsed.json")


def run(subcommand, config, *extra):
    cmd = [sys.executable, "-m", "pbg_spdc.cli", subcommand, config, *extra]
    print("+", " ".join(cmd[2:]))
    subprocess.run(cmd, check=True)


def main():
    for subcommand in ("validate", "transmission", "spectrum", "hom", "efficiency", "time-map"):
        run(subcommand, CW)
    for subcommand in ("validate", "jsa", "flux", "hom", "time-map"):
        run(subcommand, PULSED)
    print("outputs under", os.path.join(ROOT, "out"))


if __name__ == "__main__":
    main()

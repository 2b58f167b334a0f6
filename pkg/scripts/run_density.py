#!/usr/bin/env python3
"""Run the density experiment: closed geodesics approximate an irrational one.

Approximates the golden-slope trajectory on the marked torus by closed
geodesics drawn from the saddle-connection inventory at Fibonacci length
bounds; the compact-open distance (exponentially weighted over a finite
window) must decrease below eta.
"""

import pathlib
import sys

from conesurf.cli import run

ROOT = pathlib.Path(__file__).resolve().parent.parent


def main() -> int:
    return run(["experiment", "density",
                "--surface", str(ROOT / "surfaces" / "torus_marked.json"),
                "--config", str(ROOT / "configs" / "density_torus_golden.json"),
                "--report", "density_torus_report.json"])


if __name__ == "__main__":
    sys.exit(main())

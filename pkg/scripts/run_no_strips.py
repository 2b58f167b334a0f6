#!/usr/bin/env python3
"""Run the minimum-distance experiments: trajectories approach the singular set.

Traces a golden-slope geodesic on the marked torus and an irrational-slope
geodesic on the regular octagon, tabulating m(T) = min distance from the
trajectory up to arclength T to the singular set.  PASS means m is
non-increasing and ends below the configured threshold.
"""

import pathlib
import sys

from conesurf.cli import run

ROOT = pathlib.Path(__file__).resolve().parent.parent


def main() -> int:
    rc = 0
    for surface, config, report in [
        ("torus_marked", "no_strips_torus_golden", "no_strips_torus_report.json"),
        ("octagon", "no_strips_octagon", "no_strips_octagon_report.json"),
    ]:
        print(f"== no-strips on {surface} ==")
        rc |= run(["experiment", "no-strips",
                   "--surface", str(ROOT / "surfaces" / f"{surface}.json"),
                   "--config", str(ROOT / "configs" / f"{config}.json"),
                   "--report", report])
    return rc


if __name__ == "__main__":
    sys.exit(main())

"""Tolerances and resource limits, overridable per call or via a JSON file."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace, fields


@dataclass(frozen=True)
class Tolerances:
    """Numeric tolerances used across the library.

    All lengths are in chart units; angles in radians.
    """

    tau_len: float = 1e-9        # edge-length agreement, arclength additivity
    tau_angle: float = 1e-9      # angle comparisons
    tau_hit: float = 1e-9        # vertex-proximity that counts as a cone hit
    tau_rec: float = 1e-7        # state-recurrence match (point and direction)
    tau_dev: float = 1e-8        # developed collinearity residual per unit length
    tau_exit: float = 1e-12      # minimum advance when solving for a chart exit
    sample_ds: float = 0.01      # sampling interval for min-distance telemetry
    distance_step: float = 1e-3  # quadrature step for the compact-open distance
    w_max_factor: float = 1e3    # strip-width cap, in units of max chart diameter
    unfolding_budget: int = 10**6   # max developed chart copies
    search_budget: int = 10**5      # max nodes in monodromy backtracking

    def with_overrides(self, **kwargs) -> "Tolerances":
        return replace(self, **kwargs)


DEFAULT_TOLERANCES = Tolerances()

_FIELD_NAMES = {f.name for f in fields(Tolerances)}


def load_tolerance_overrides(path) -> Tolerances:
    """Build a Tolerances from a JSON object file; unknown keys are an error."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"tolerance override file {path} must hold a JSON object")
    unknown = set(data) - _FIELD_NAMES
    if unknown:
        raise ValueError(f"unknown tolerance keys in {path}: {sorted(unknown)}")
    return Tolerances(**data)

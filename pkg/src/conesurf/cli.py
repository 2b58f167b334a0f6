"""Command-line interface wiring every module together.

Subcommands: validate, trace, saddles, cylinders, density, cover, experiment,
selftest.  Exit codes: 0 success / experiment PASS, 2 validation or usage
error, 3 experiment FAIL.  Reports are deterministic: identical inputs yield
byte-identical CSV/JSON (wall-clock timing is opt-in via --timings).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
import time

from .config import DEFAULT_TOLERANCES, Tolerances
from .corpus import BUILDERS
from .covering import CoverSpec, build_cover, default_odd_degree, find_monodromy, riemann_hurwitz_check
from .cylinders import density_experiment, find_closed_geodesic
from .errors import ConeSurfaceError
from .saddles import direction_spectrum, enumerate_saddles
from .surface import (
    classify_singularities,
    load_surface,
    save_surface,
    validate_gauss_bonnet,
)
from .svgout import write_trace_svg
from .tracer import (
    GeodesicState,
    TraceOptions,
    continuation_sector,
    develop,
    min_distance_experiment,
    predict_self_intersection,
    trace,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_FAIL = 3

_SELFTEST_SEED = 20260814


@dataclasses.dataclass
class ExperimentConfig:
    """Parsed experiment description (no-strips or density)."""

    scenario: str
    start: dict            # {chart, x, y, dx, dy}
    lengths: list
    threshold: float
    window: float = 5.0
    chain_budget: int = 200

    def validate(self) -> None:
        if self.scenario not in ("no-strips", "density"):
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if not self.lengths or any(b <= a for a, b in zip(self.lengths, self.lengths[1:])):
            raise ValueError("lengths must be a strictly increasing schedule")
        if self.lengths[0] <= 0:
            raise ValueError("lengths must be positive")
        if self.threshold <= 0:
            raise ValueError("threshold must be positive")
        if self.window <= 0:
            raise ValueError("window must be positive")
        for key in ("chart", "x", "y", "dx", "dy"):
            if key not in self.start:
                raise ValueError(f"experiment start is missing {key!r}")


@dataclasses.dataclass
class RunReport:
    """Deterministic machine-readable record of one CLI run."""

    scenario: str
    inputs: dict
    metrics: dict
    verdicts: dict
    seed: int | None = None
    wall_clock: float | None = None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _json_default(obj):
    if isinstance(obj, float) and math.isinf(obj):
        return "inf"
    raise TypeError(f"not JSON serializable: {obj!r}")


def _sanitize(obj):
    """Replace non-finite floats so json stays standards-compliant."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    return obj


def _write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_sanitize(payload), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def _print_json(payload) -> None:
    print(json.dumps(_sanitize(payload), indent=2, sort_keys=True, allow_nan=False))


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _load_tolerances(args) -> Tolerances:
    if not getattr(args, "tolerance_overrides", None):
        return DEFAULT_TOLERANCES
    with open(args.tolerance_overrides, "r", encoding="utf-8") as fh:
        overrides = json.load(fh)
    known = {f.name for f in dataclasses.fields(Tolerances)}
    bad = sorted(set(overrides) - known)
    if bad:
        raise ConeSurfaceError(f"unknown tolerance fields: {bad}; known: {sorted(known)}")
    return dataclasses.replace(DEFAULT_TOLERANCES, **overrides)


def _load(args, tol) -> "ConeSurface":
    return load_surface(args.surface, tol)


def _say(args, msg: str) -> None:
    if not args.quiet:
        print(msg)


def _parse_direction(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ConeSurfaceError(f"--direction expects 'dx,dy', got {text!r}")
    return (float(parts[0]), float(parts[1]))


def _state_from_dict(data: dict) -> GeodesicState:
    return GeodesicState(str(data["chart"]), (float(data["x"]), float(data["y"])),
                         (float(data["dx"]), float(data["dy"])))


# -- subcommands ------------------------------------------------------------------


def cmd_validate(args) -> int:
    tol = _load_tolerances(args)
    surface = _load(args, tol)
    report = validate_gauss_bonnet(surface)
    kinds = classify_singularities(surface)
    payload = {
        "charts": len(surface.charts),
        "gluings": len(surface.gluings),
        "euler_characteristic": surface.euler_characteristic,
        "gauss_bonnet": {"lhs": report.lhs, "rhs": report.rhs, "residual": report.residual},
        "vertex_classes": {vc.id: {"angle": vc.angle, "kind": vc.kind,
                                   "singular": vc.singular, "corners": len(vc.members)}
                           for vc in surface.vertex_classes.values()},
        "kinds": kinds,
    }
    ok = report.residual <= 1e-9
    _say(args, f"charts={len(surface.charts)} gluings={len(surface.gluings)} "
               f"chi={surface.euler_characteristic}")
    _say(args, f"gauss-bonnet residual {report.residual:.3e} "
               f"({'OK' if ok else 'EXCEEDS 1e-9'})")
    for vc in surface.vertex_classes.values():
        _say(args, f"  class {vc.id}: angle {vc.angle / math.pi:.6g}*pi "
                   f"[{vc.kind}{', singular' if vc.singular else ''}]")
    if args.json:
        _print_json(payload)
    return EXIT_OK if ok else EXIT_INVALID


def cmd_trace(args) -> int:
    tol = _load_tolerances(args)
    surface = _load(args, tol)
    start = GeodesicState(args.chart, (args.x, args.y), (args.dx, args.dy))
    options = TraceOptions(stop_on_cone=args.stop_on_cone,
                           detect_recurrence=args.recurrence,
                           record_min_distance=True)
    result = trace(surface, start, args.max_length, options=options, tolerances=tol)
    dev = develop(result)
    m_final = result.min_distance_at(result.total_length)
    _say(args, f"termination {result.termination} at arclength {result.total_length:.12g}")
    _say(args, f"end state: chart {result.end_state.chart} point "
               f"({result.end_state.point[0]:.12g}, {result.end_state.point[1]:.12g})")
    _say(args, f"events: {len(result.events)}; collinearity residual "
               f"{dev.collinearity_residual:.3e}/unit; m(T) = {m_final:.12g}")
    if args.csv:
        rows = [(0.0, result.start.chart, result.start.point[0], result.start.point[1],
                 result.min_distance_at(0.0))]
        s = 0.0
        for cid, a, b in result.segments:
            s += math.hypot(b[0] - a[0], b[1] - a[1])
            rows.append((s, cid, b[0], b[1], result.min_distance_at(s)))
        _write_csv(args.csv, ["arclength", "chart", "x", "y", "m_of_T"], rows)
        _say(args, f"wrote {args.csv}")
    if args.svg:
        write_trace_svg(surface, result, args.svg)
        _say(args, f"wrote {args.svg}")
    if args.json:
        _print_json({
            "termination": result.termination,
            "total_length": result.total_length,
            "end": {"chart": result.end_state.chart, "x": result.end_state.point[0],
                    "y": result.end_state.point[1]},
            "events": [{"kind": ev.kind, "arclength": ev.arclength} for ev in result.events],
            "min_distance": m_final,
        })
    return EXIT_OK


def cmd_saddles(args) -> int:
    tol = _load_tolerances(args)
    surface = _load(args, tol)
    if args.base == "all":
        bases = sorted(vc.id for vc in surface.singular_classes)
    else:
        bases = [args.base]
    connections = []
    for base in bases:
        connections.extend(enumerate_saddles(surface, base, args.max_length, tolerances=tol))
    connections.sort(key=lambda c: (c.length, c.angle, c.start, c.end))
    _say(args, f"{len(connections)} saddle connections up to length {args.max_length:.12g} "
               f"from {', '.join(bases)}")
    if args.csv:
        _write_csv(args.csv, ["start", "end", "length", "hx", "hy"],
                   [(c.start, c.end, c.length, c.holonomy[0], c.holonomy[1])
                    for c in connections])
        _say(args, f"wrote {args.csv}")
    if args.spectrum:
        spec = direction_spectrum(surface, args.max_length, tolerances=tol)
        _write_csv(args.spectrum, ["angle", "multiplicity"],
                   list(zip(spec.angles, spec.multiplicities)))
        _say(args, f"wrote {args.spectrum} (max gap {spec.max_gap:.12g})")
    if args.json:
        _print_json([{"start": c.start, "end": c.end, "length": c.length,
                      "hx": c.holonomy[0], "hy": c.holonomy[1]} for c in connections])
    return EXIT_OK


def _witness_dicts(witnesses) -> list[dict]:
    return [{"x": w.x, "y": w.y, "class": w.class_id} for w in witnesses]


def cmd_cylinders(args) -> int:
    tol = _load_tolerances(args)
    surface = _load(args, tol)
    if (args.direction is None) == (args.from_saddle is None):
        raise ConeSurfaceError("exactly one of --direction or --from-saddle is required")
    if args.direction is not None:
        direction = _parse_direction(args.direction)
    else:
        bases = sorted(vc.id for vc in surface.singular_classes)
        connections = []
        for base in bases:
            connections.extend(enumerate_saddles(surface, base, args.max_length, tolerances=tol))
        connections.sort(key=lambda c: (c.length, c.angle, c.start, c.end))
        if not 0 <= args.from_saddle < len(connections):
            raise ConeSurfaceError(
                f"--from-saddle {args.from_saddle} out of range; "
                f"{len(connections)} connections up to length {args.max_length}")
        direction = connections[args.from_saddle].direction
    start = None
    if args.chart is not None:
        start = (args.chart, (args.x, args.y))
    cyl = find_closed_geodesic(surface, direction, start, tolerances=tol)
    if cyl is None:
        payload = {"found": False, "direction": list(direction)}
        _say(args, "no closed geodesic found in that direction")
    else:
        payload = {
            "found": True,
            "direction": list(cyl.direction),
            "start": {"chart": cyl.start.chart, "x": cyl.start.point[0],
                      "y": cyl.start.point[1]},
            "circumference": cyl.circumference,
            "closure_error": cyl.closure_error,
            "d_L": cyl.width_left,
            "d_R": cyl.width_right,
            "boundary": {side: _witness_dicts(ws) for side, ws in cyl.witnesses.items()},
            "bounding_saddles": {side: [{"start": c.start, "end": c.end, "length": c.length}
                                        for c in conns]
                                 for side, conns in cyl.bounding.items()},
        }
        wl = "inf" if cyl.width_left == math.inf else f"{cyl.width_left:.12g}"
        wr = "inf" if cyl.width_right == math.inf else f"{cyl.width_right:.12g}"
        _say(args, f"closed geodesic: circumference {cyl.circumference:.12g}, "
                   f"d_L {wl}, d_R {wr}")
    if args.report:
        _write_json(args.report, payload)
        _say(args, f"wrote {args.report}")
    if args.json:
        _print_json(payload)
    return EXIT_OK


def _run_density(surface, target, lengths, window, eta, chain_budget, tol):
    report = density_experiment(surface, target, lengths, window=window, eta=eta,
                                chain_budget=chain_budget, tolerances=tol)
    metrics = {
        "rows": [dict(r) for r in report.rows],
        "inventory": dict(report.inventory),
        "final_distance": report.final_distance,
        "window": report.window,
        "eta": report.eta,
    }
    return report.passed, metrics


def cmd_density(args) -> int:
    tol = _load_tolerances(args)
    surface = _load(args, tol)
    with open(args.target_spec, "r", encoding="utf-8") as fh:
        target = _state_from_dict(json.load(fh))
    lengths = [float(v) for v in args.lengths.split(",")]
    started = time.perf_counter()
    passed, metrics = _run_density(surface, target, lengths, args.window, args.eta,
                                   args.chain_budget, tol)
    report = RunReport(
        scenario="density",
        inputs={"surface": args.surface, "target_spec": args.target_spec,
                "lengths": lengths, "window": args.window, "eta": args.eta},
        metrics=metrics,
        verdicts={"passed": passed},
        wall_clock=(time.perf_counter() - started) if args.timings else None,
    )
    _write_json(args.report, report.to_dict())
    for row in metrics["rows"]:
        _say(args, f"  L={row['length_bound']:g}: distance {row['distance']:.6g} "
                   f"({row['kind']}, length {row['approximant_length']})")
    _say(args, f"density: {'PASS' if passed else 'FAIL'} "
               f"(final {metrics['final_distance']:.6g} vs eta {args.eta:g}); "
               f"wrote {args.report}")
    if args.json:
        _print_json(report.to_dict())
    return EXIT_OK if passed else EXIT_FAIL


def cmd_cover(args) -> int:
    tol = _load_tolerances(args)
    surface = _load(args, tol)
    degree = default_odd_degree(surface) if args.degree == "auto" else int(args.degree)
    if args.monodromy == "search":
        spec = find_monodromy(surface, degree, tolerances=tol)
    else:
        with open(args.monodromy, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        spec = CoverSpec(degree, {int(k): tuple(v) for k, v in raw.items()})
    cover, report = build_cover(surface, spec, tolerances=tol)
    residual = riemann_hurwitz_check(surface, cover, report)
    payload = report.to_dict()
    payload["riemann_hurwitz_residual"] = residual
    payload["edge_permutations"] = {str(k): list(v)
                                    for k, v in sorted(spec.edge_permutations.items())}
    _say(args, f"degree {degree} cover: chi {cover.euler_characteristic}, "
               f"{'connected' if report.connected else f'{report.components} components'}, "
               f"riemann-hurwitz residual {residual}")
    for cid, info in sorted(payload["cover_classes"].items()):
        _say(args, f"  class {cid}: angle {info['angle'] / math.pi:.6g}*pi over "
                   f"{info['base_class']} (local degree {info['local_degree']})")
    if args.out:
        save_surface(cover, args.out)
        _say(args, f"wrote {args.out}")
    if args.report:
        _write_json(args.report, payload)
        _say(args, f"wrote {args.report}")
    if args.json:
        _print_json(payload)
    return EXIT_OK


def cmd_experiment(args) -> int:
    tol = _load_tolerances(args)
    surface = _load(args, tol)
    with open(args.config, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    cfg = ExperimentConfig(
        scenario=args.scenario,
        start=raw.get("start", raw.get("target", {})),
        lengths=[float(v) for v in raw.get("lengths", [])],
        threshold=float(raw.get("threshold", raw.get("eta", 0.05))),
        window=float(raw.get("window", 5.0)),
        chain_budget=int(raw.get("chain_budget", 200)),
    )
    try:
        cfg.validate()
    except ValueError as exc:
        raise ConeSurfaceError(str(exc)) from exc
    started = time.perf_counter()
    state = _state_from_dict(cfg.start)

    if args.scenario == "no-strips":
        rep = min_distance_experiment(surface, state, cfg.lengths, threshold=cfg.threshold,
                                      tolerances=tol)
        metrics = {"rows": [[L, m] for L, m in rep.rows], "threshold": cfg.threshold}
        passed = rep.passed
        for L, m in rep.rows:
            _say(args, f"  m({L:g}) = {m:.12g}")
    else:
        passed, metrics = _run_density(surface, state, cfg.lengths, cfg.window,
                                       cfg.threshold, cfg.chain_budget, tol)
        for row in metrics["rows"]:
            _say(args, f"  L={row['length_bound']:g}: distance {row['distance']:.6g}")

    report = RunReport(
        scenario=args.scenario,
        inputs={"surface": args.surface, "config": args.config,
                "start": cfg.start, "lengths": cfg.lengths,
                "threshold": cfg.threshold, "window": cfg.window},
        metrics=metrics,
        verdicts={"passed": passed},
        wall_clock=(time.perf_counter() - started) if args.timings else None,
    )
    _write_json(args.report, report.to_dict())
    _say(args, f"{args.scenario}: {'PASS' if passed else 'FAIL'}; wrote {args.report}")
    if args.json:
        _print_json(report.to_dict())
    return EXIT_OK if passed else EXIT_FAIL


def cmd_selftest(args) -> int:
    import numpy as np

    tol = _load_tolerances(args)
    seed = args.seed
    rng = np.random.default_rng(seed)
    checks: list[tuple[str, bool, str]] = []
    started = time.perf_counter()

    surfaces = {name: builder(tolerances=tol) for name, builder in BUILDERS.items()}

    worst = max(validate_gauss_bonnet(s).residual for s in surfaces.values())
    checks.append(("gauss-bonnet residual <= 1e-9 on corpus", worst <= 1e-9, f"{worst:.3e}"))

    octagon = surfaces["octagon"]
    n_traces = 20 if args.quick else 100
    worst_col, worst_add = 0.0, 0.0
    geo = octagon.geometry["oct"]
    for _ in range(n_traces):
        w = rng.uniform(0.05, 0.6)
        v = geo.vertices[rng.integers(0, geo.n)]
        p = (geo.centroid[0] * (1 - w) + v[0] * w, geo.centroid[1] * (1 - w) + v[1] * w)
        a = rng.uniform(0.0, 2.0 * math.pi)
        st = GeodesicState("oct", p, (math.cos(a), math.sin(a)))
        tr = trace(octagon, st, float(rng.uniform(20.0, 60.0)),
                   options=TraceOptions(detect_recurrence=False, record_min_distance=False),
                   tolerances=tol)
        dv = develop(tr)
        worst_col = max(worst_col, dv.collinearity_residual)
        seg_sum = sum(math.hypot(b[0] - a0[0], b[1] - a0[1]) for _, a0, b in tr.segments)
        worst_add = max(worst_add, abs(seg_sum - tr.total_length))
    checks.append((f"collinearity <= 1e-8/unit over {n_traces} random octagon traces",
                   worst_col <= 1e-8, f"{worst_col:.3e}"))
    checks.append((f"arclength additivity <= 1e-7 over {n_traces} random octagon traces",
                   worst_add <= 1e-7, f"{worst_add:.3e}"))

    sector_ok = True
    detail = []
    for name, s in surfaces.items():
        for vc in s.vertex_classes.values():
            chart, vertex, u = vc.direction_at(vc.offsets[0] + 0.5 * vc.angles[0])
            sec = continuation_sector(s, vc.id, (-u[0], -u[1]), corner=(chart, vertex))
            want = max(0.0, vc.angle - 2.0 * math.pi)
            if sec.width != want:
                sector_ok = False
                detail.append(f"{name}/{vc.id}")
    checks.append(("continuation sector width == max(0, angle - 2*pi) on corpus",
                   sector_ok, ",".join(detail) or "exact"))

    pred = predict_self_intersection(1.0, math.pi / 2.0)
    spot_ok = (abs(pred["parameter_offset"] - 1.0) < 1e-15
               and abs(pred["intersection_distance"] - math.sqrt(2.0)) < 1e-15)
    checks.append(("self-intersection closed form at (1, pi/2)", spot_ok,
                   f"t'={pred['parameter_offset']:.12g} T={pred['intersection_distance']:.12g}"))

    torus = surfaces["torus_marked"]
    conns = enumerate_saddles(torus, "v0", 5.0, tolerances=tol)
    checks.append(("48 torus saddle connections at L=5", len(conns) == 48, str(len(conns))))

    all_ok = all(ok for _, ok, _ in checks)
    for name, ok, note in checks:
        _say(args, f"[{'PASS' if ok else 'FAIL'}] {name} ({note})")
    _say(args, f"selftest seed {seed}: {'PASS' if all_ok else 'FAIL'}")

    if args.report:
        report = RunReport(
            scenario="selftest",
            inputs={"quick": args.quick},
            metrics={"checks": [{"name": n, "passed": ok, "note": note}
                                for n, ok, note in checks]},
            verdicts={"passed": all_ok},
            seed=seed,
            wall_clock=(time.perf_counter() - started) if args.timings else None,
        )
        _write_json(args.report, report.to_dict())
        _say(args, f"wrote {args.report}")
    return EXIT_OK if all_ok else EXIT_FAIL


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conesurf",
        description="Geodesics, saddle connections, cylinders, and branched covers "
                    "on Euclidean cone surfaces.")
    parser.add_argument("--tolerance-overrides", metavar="FILE",
                        help="JSON file overriding tolerance fields by name")
    parser.add_argument("--quiet", action="store_true", help="suppress console output")
    parser.add_argument("--json", action="store_true",
                        help="also print the machine-readable result to stdout")
    parser.add_argument("--timings", action="store_true",
                        help="include wall-clock time in reports (non-deterministic)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check surface invariants and Gauss-Bonnet")
    p.add_argument("--surface", required=True, help="surface JSON file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("trace", help="trace a geodesic and export CSV/SVG")
    p.add_argument("--surface", required=True)
    p.add_argument("--chart", required=True, help="starting chart id")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--y", type=float, required=True)
    p.add_argument("--dx", type=float, required=True)
    p.add_argument("--dy", type=float, required=True)
    p.add_argument("--max-length", type=float, required=True)
    p.add_argument("--stop-on-cone", action=argparse.BooleanOptionalAction, default=True,
                   help="terminate at singular cone points (default: yes)")
    p.add_argument("--recurrence", action="store_true",
                   help="detect state recurrence (closed geodesics)")
    p.add_argument("--svg", metavar="OUT.svg", help="developed-picture rendering")
    p.add_argument("--csv", metavar="OUT.csv",
                   help="columns: arclength, chart, x, y, m_of_T")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("saddles", help="enumerate saddle connections up to a length")
    p.add_argument("--surface", required=True)
    p.add_argument("--max-length", type=float, required=True)
    p.add_argument("--base", default="all",
                   help="base vertex class id, or 'all' (default)")
    p.add_argument("--csv", metavar="OUT.csv", help="columns: start, end, length, hx, hy")
    p.add_argument("--spectrum", metavar="OUT.csv", help="columns: angle, multiplicity")
    p.set_defaults(func=cmd_saddles)

    p = sub.add_parser("cylinders", help="find a closed geodesic and its strip widths")
    p.add_argument("--surface", required=True)
    p.add_argument("--direction", help="dx,dy")
    p.add_argument("--from-saddle", type=int,
                   help="take the direction of the i-th enumerated connection")
    p.add_argument("--max-length", type=float, default=10.0,
                   help="enumeration bound used with --from-saddle (default 10)")
    p.add_argument("--chart", help="optional launch chart (with --x/--y)")
    p.add_argument("--x", type=float, default=0.0)
    p.add_argument("--y", type=float, default=0.0)
    p.add_argument("--report", metavar="OUT.json")
    p.set_defaults(func=cmd_cylinders)

    p = sub.add_parser("density", help="approximate a target trajectory by closed ones")
    p.add_argument("--surface", required=True)
    p.add_argument("--target-spec", required=True,
                   help="JSON file {chart, x, y, dx, dy}")
    p.add_argument("--lengths", required=True, help="comma-separated length schedule")
    p.add_argument("--window", type=float, default=5.0)
    p.add_argument("--eta", type=float, default=0.05)
    p.add_argument("--chain-budget", type=int, default=200)
    p.add_argument("--report", metavar="OUT.json", default="density_report.json")
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("cover", help="build a branched cover from monodromy data")
    p.add_argument("--surface", required=True)
    p.add_argument("--degree", default="auto",
                   help="integer degree, or 'auto' for the smallest odd degree "
                        "unfolding every small cone angle past 2*pi")
    p.add_argument("--monodromy", default="search",
                   help="JSON file mapping gluing index to a one-line permutation, "
                        "or 'search' (default) to find one by backtracking")
    p.add_argument("--out", metavar="COVER.json", help="write the cover surface")
    p.add_argument("--report", metavar="REPORT.json", help="write the branch report")
    p.set_defaults(func=cmd_cover)

    p = sub.add_parser("experiment", help="run a configured scenario with PASS/FAIL verdict")
    p.add_argument("scenario", choices=["no-strips", "density"])
    p.add_argument("--surface", required=True)
    p.add_argument("--config", required=True, help="experiment JSON config")
    p.add_argument("--report", metavar="OUT.json", default=None)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("selftest", help="run seeded sanity checks on the bundled corpus")
    p.add_argument("--seed", type=int, default=_SELFTEST_SEED)
    p.add_argument("--quick", action="store_true", help="smaller random samples")
    p.add_argument("--report", metavar="OUT.json")
    p.set_defaults(func=cmd_selftest)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) == "experiment" and args.report is None:
        args.report = f"{args.scenario.replace('-', '_')}_report.json"
    try:
        return args.func(args)
    except ConeSurfaceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

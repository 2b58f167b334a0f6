"""Geodesic tracing by straight-line flow across chart gluings.

A trajectory is advanced inside its current chart until it meets the polygon
boundary; crossing an edge applies the gluing isometry, meeting a corner is
classified against the corner's vertex class. Singular classes stop the trace
(reporting the admissible continuation sector); non-singular flat corners are
passed straight through using the class's angular coordinate system.

The module also provides the developing map for a traced path (the unfolded
straight segment), closed-form self-intersection parameters for passage near a
small cone point, distance-to-singularities telemetry, and the exponentially
weighted compact-open distance between two traced paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

_trapezoid = getattr(np, "trapezoid", None) or np.trapz

from .config import Tolerances
from .errors import (
    AngleOutOfRange,
    DomainError,
    IncomparableTraces,
    InsufficientPath,
    StartOutsideSurface,
    TraceNumericalError,
    ZeroDirection,
)
from .geometry import (
    Isometry,
    angle_of,
    min_distance_to_points_on_segment,
    norm,
    point_in_polygon,
    point_segment_distance,
)
from .surface import KIND_LARGE, KIND_MARKED, ConeSurface, VertexClass

EVENT_EDGE_CROSS = "EdgeCross"
EVENT_CONE_HIT = "ConeHit"
EVENT_VERTEX_PASS = "VertexPass"
EVENT_MAX_LENGTH = "MaxLengthReached"
EVENT_SELF_RECURRENCE = "SelfRecurrence"


@dataclass(frozen=True)
class GeodesicState:
    chart: str
    point: tuple[float, float]
    direction: tuple[float, float]
    arclength: float = 0.0


@dataclass
class TraceEvent:
    kind: str
    arclength: float
    detail: dict


@dataclass(frozen=True)
class ContinuationSector:
    """Admissible outgoing directions after hitting a cone point.

    Directions are angular coordinates around the vertex class. Any coordinate
    in [start, start + width] (mod angle) leaves at least pi on both sides of
    the incoming ray; the interval is centered opposite the incoming direction.
    Empty whenever the cone angle is at most 2*pi.
    """

    class_id: str
    angle: float            # total cone angle at the class
    incoming_coordinate: float
    start: float            # (incoming_coordinate + pi) mod angle
    width: float            # max(0, angle - 2*pi)

    @property
    def is_empty(self) -> bool:
        return self.width <= 0.0

    def contains(self, t: float, tol: float = 1e-12) -> bool:
        if self.is_empty:
            return False
        rel = (t - self.start) % self.angle
        return rel <= self.width + tol

    def coordinates(self, count: int) -> list[float]:
        """Evenly spaced admissible coordinates (inclusive of both ends)."""
        if self.is_empty:
            return []
        if count == 1:
            return [(self.start + 0.5 * self.width) % self.angle]
        return [(self.start + self.width * k / (count - 1)) % self.angle
                for k in range(count)]


@dataclass(frozen=True)
class TraceOptions:
    stop_on_cone: bool = True          # False: pass through marked (2*pi) points
    detect_recurrence: bool = True
    stop_on_recurrence: bool = False
    record_min_distance: bool = True


DEFAULT_TRACE_OPTIONS = TraceOptions()


@dataclass
class TraceResult:
    start: GeodesicState
    segments: list            # (chart_id, (x0, y0), (x1, y1))
    transitions: list         # per boundary: Isometry mapping next chart -> previous chart frame
    events: list
    total_length: float
    end_state: GeodesicState
    termination: str
    recurrence: dict | None
    min_distance_series: list  # (arclength, running min distance to singular set)

    _bounds: np.ndarray | None = field(default=None, repr=False)
    _p0: np.ndarray | None = field(default=None, repr=False)
    _dirs: np.ndarray | None = field(default=None, repr=False)
    _chart_ids: list | None = field(default=None, repr=False)
    _chart_codes: np.ndarray | None = field(default=None, repr=False)

    @property
    def recurrence_period(self) -> float | None:
        return self.recurrence["period"] if self.recurrence else None

    def param_range(self) -> tuple[float, float]:
        return (0.0, self.total_length)

    def _ensure_arrays(self):
        if self._bounds is not None:
            return
        lengths = [math.hypot(b[0] - a[0], b[1] - a[1]) for _, a, b in self.segments]
        bounds = np.concatenate([[0.0], np.cumsum(lengths)])
        p0 = np.array([a for _, a, _ in self.segments], dtype=float)
        p1 = np.array([b for _, _, b in self.segments], dtype=float)
        with np.errstate(invalid="ignore", divide="ignore"):
            dirs = (p1 - p0) / np.maximum(np.array(lengths)[:, None], 1e-300)
        ids = sorted({c for c, _, _ in self.segments})
        code = {c: k for k, c in enumerate(ids)}
        self._bounds = bounds
        self._p0 = p0
        self._dirs = dirs
        self._chart_ids = ids
        self._chart_codes = np.array([code[c] for c, _, _ in self.segments])

    def positions(self, ts: np.ndarray):
        """Chart ids and coordinates at the given arclengths.

        Returns (charts, xy) where charts is a list of chart ids per sample and
        xy an (n, 2) array. Arclengths must lie in [0, total_length] up to a
        small slack.
        """
        self._ensure_arrays()
        ts = np.asarray(ts, dtype=float)
        if ts.size and (ts.min() < -1e-9 or ts.max() > self.total_length + 1e-9):
            raise InsufficientPath(
                f"arclength range [{ts.min():.6g}, {ts.max():.6g}] outside "
                f"[0, {self.total_length:.6g}]")
        idx = np.clip(np.searchsorted(self._bounds, ts, side="right") - 1,
                      0, len(self.segments) - 1)
        rel = np.clip(ts - self._bounds[idx], 0.0, None)
        xy = self._p0[idx] + rel[:, None] * self._dirs[idx]
        charts = [self._chart_ids[c] for c in self._chart_codes[idx]]
        return charts, xy

    def state_at(self, t: float) -> GeodesicState:
        self._ensure_arrays()
        idx = int(np.clip(np.searchsorted(self._bounds, t, side="right") - 1,
                          0, len(self.segments) - 1))
        rel = t - self._bounds[idx]
        cid, a, b = self.segments[idx]
        u = self._dirs[idx]
        return GeodesicState(cid, (a[0] + rel * u[0], a[1] + rel * u[1]),
                             (float(u[0]), float(u[1])), t)

    def min_distance_at(self, T: float) -> float:
        """Running minimum of the recorded series at arclength T."""
        best = math.inf
        for s, m in self.min_distance_series:
            if s <= T + 1e-12 and m < best:
                best = m
        return best


# -- stepping -------------------------------------------------------------------


def _ray_exit(geo, p, d, tau_exit, tau_hit):
    """First boundary intersection of the ray p + s d, s > tau_exit.

    Returns (edge index, s, u) or None. u is the fraction along the edge,
    tolerantly clamped near endpoints (vertex hits are resolved by the caller).
    """
    px, py = float(p[0]), float(p[1])
    dx, dy = float(d[0]), float(d[1])
    best = None
    best_s = math.inf
    for i, (vx, vy, ex, ey, inv_len) in enumerate(geo.scalar_edges):
        denom = dx * ey - dy * ex
        if -1e-15 < denom < 1e-15:
            continue
        relx = vx - px
        rely = vy - py
        s = (relx * ey - rely * ex) / denom
        if s <= tau_exit or s >= best_s:
            continue
        u = (relx * dy - rely * dx) / denom
        eps_u = 2.0 * tau_hit * inv_len
        if u < -eps_u or u > 1.0 + eps_u:
            continue
        best_s = s
        best = (i, s, u)
    return best


def _check_recurrence(crossings, chart, p, d, s, tau_rec):
    """Match the state against earlier boundary states in the same chart.

    Returns {period, detected_at, matched_at} on the first match; the period
    is the arclength elapsed since the matched state, i.e. the first-return
    time of the recurring state.
    """
    rows = crossings.get(chart)
    if not rows:
        return None
    arr = np.array(rows)
    close = (np.abs(arr[:, 0] - p[0]) < tau_rec) & \
            (np.abs(arr[:, 1] - p[1]) < tau_rec) & \
            (np.abs(arr[:, 2] - d[0]) < tau_rec) & \
            (np.abs(arr[:, 3] - d[1]) < tau_rec) & \
            (s - arr[:, 4] > 1e-9)
    if not close.any():
        return None
    matched = float(arr[int(np.argmax(close)), 4])
    return {"period": s - matched, "detected_at": s, "matched_at": matched}


def _outward_edge(geo, p, d, tau_hit: float):
    """Edge within tau of p whose exterior side the direction points into.

    A point on a gluing edge is the same surface point in either chart; when
    the direction leaves the current chart expression the trace continues in
    the partner chart. Returns the most decisively outward edge, or None.
    """
    best, arg = 1e-12, None
    for e in range(geo.n):
        v0, v1 = geo.vertices[e], geo.vertices[(e + 1) % geo.n]
        if point_segment_distance(p, v0, v1) > tau_hit:
            continue
        ex, ey = v1[0] - v0[0], v1[1] - v0[1]
        out = (ey * d[0] - ex * d[1]) / math.hypot(ex, ey)
        if out > best:
            best, arg = out, e
    return arg


class _MinDistTracker:
    """Exact running distance from the traced path to the singular set.

    Per segment the minimum over candidate singular images (own chart corners
    plus one unfolded ring) is computed in closed form; a series sampled at the
    configured interval plus every segment end is kept for telemetry. Values
    are capped at the max chart diameter, the radius within which the one-ring
    candidate set is meaningful.
    """

    def __init__(self, surface: ConeSurface, sample_ds: float):
        self.surface = surface
        self.ds = sample_ds
        self.cap = surface.max_diameter
        self.best = math.inf
        self.series: list[tuple[float, float]] = []

    def add_segment(self, chart, p0, p1, s0, s1):
        cands = self.surface.singular_images(chart)
        seg_len = s1 - s0
        if len(cands) == 0:
            self.series.append((s1, min(self.best, self.cap) if self.best < math.inf else math.inf))
            return
        p0a = np.asarray(p0, dtype=float)
        if seg_len <= 0.0:
            d0 = float(np.sqrt(((cands - p0a) ** 2).sum(axis=1)).min())
            self.best = min(self.best, d0)
            self.series.append((s1, min(self.best, self.cap)))
            return
        u = (np.asarray(p1, dtype=float) - p0a) / seg_len
        rel = cands - p0a
        t_w = rel @ u
        perp2 = np.maximum((rel * rel).sum(axis=1) - t_w * t_w, 0.0)

        # sample grid: multiples of ds falling in (s0, s1], plus the segment end
        k0 = math.floor(s0 / self.ds) + 1
        k1 = math.floor(s1 / self.ds)
        sig = [self.ds * k - s0 for k in range(k0, k1 + 1)]
        if s0 == 0.0:
            sig.insert(0, 0.0)
        if not sig or sig[-1] < seg_len:
            sig.append(seg_len)
        sig_arr = np.array(sig)
        foot = np.clip(t_w[:, None], 0.0, sig_arr[None, :])
        dist = np.sqrt(perp2[:, None] + (t_w[:, None] - foot) ** 2)
        run = np.minimum.accumulate(dist.min(axis=0))
        for offset, m in zip(sig, run):
            self.best = min(self.best, float(m))
            self.series.append((s0 + offset, min(self.best, self.cap)))


def _vertex_alignment(v_cur, v_next, d_cur, d_next) -> Isometry:
    """Isometry mapping the next chart's frame onto the current one so the
    straight passage through a flat corner develops without a kink."""
    phi = angle_of(d_cur) - angle_of(d_next)
    c, s = math.cos(phi), math.sin(phi)
    tx = v_cur[0] - (c * v_next[0] - s * v_next[1])
    ty = v_cur[1] - (s * v_next[0] + c * v_next[1])
    return Isometry(c, s, tx, ty)


def continuation_sector(surface: ConeSurface, class_id: str, incoming,
                        chart: str | None = None,
                        corner: tuple[str, int] | None = None) -> ContinuationSector:
    """Admissible outgoing sector after arriving at a vertex class.

    ``incoming`` is the arrival direction in chart coordinates. When the class
    has several corners in the chart, ``corner`` picks which wedge the arrival
    used; otherwise the first wedge containing the reversed direction wins
    (the sector width is corner-independent).
    """
    vc = surface.vertex_class(class_id)
    u_in = (-incoming[0], -incoming[1])
    if corner is not None:
        t_in = vc.cone_coordinate(corner[0], corner[1], u_in)
    else:
        t_in = None
        for c, k in vc.members:
            if chart is not None and c != chart:
                continue
            try:
                t_in = vc.cone_coordinate(c, k, u_in)
                break
            except ValueError:
                continue
        if t_in is None:
            raise ValueError(
                f"incoming direction does not arrive at class {class_id} "
                f"through any wedge" + (f" of chart {chart!r}" if chart else ""))
    width = max(0.0, vc.angle - 2.0 * math.pi)
    return ContinuationSector(
        class_id=vc.id, angle=vc.angle, incoming_coordinate=t_in,
        start=(t_in + math.pi) % vc.angle, width=width)


def trace(surface: ConeSurface, start: GeodesicState, max_length: float, *,
          options: TraceOptions = DEFAULT_TRACE_OPTIONS,
          tolerances: Tolerances | None = None) -> TraceResult:
    """Trace the geodesic from ``start`` for at most ``max_length``.

    Stops at singular cone hits (unless the class is marked and
    ``options.stop_on_cone`` is false), at ``max_length``, or -- when
    ``options.stop_on_recurrence`` -- at the first detected state recurrence.
    """
    tol = tolerances or surface.tolerances
    if max_length <= 0.0 or not math.isfinite(max_length):
        raise DomainError(f"max_length must be positive and finite, got {max_length}")
    cid = start.chart
    if cid not in surface.charts:
        raise StartOutsideSurface(f"unknown chart {cid!r}")
    dn = norm(start.direction)
    if dn < tol.tau_len or not math.isfinite(dn):
        raise ZeroDirection(f"direction {start.direction} has no usable length")
    d = (start.direction[0] / dn, start.direction[1] / dn)
    p = (float(start.point[0]), float(start.point[1]))
    if not point_in_polygon(surface.charts[cid], p, tol=max(tol.tau_hit, 1e-9)):
        raise StartOutsideSurface(f"point {p} is outside chart {cid!r}")
    norm_start = GeodesicState(cid, p, d, 0.0)

    segments: list = []
    transitions: list = []
    events: list[TraceEvent] = []
    tracker = _MinDistTracker(surface, tol.sample_ds) if options.record_min_distance else None
    crossings: dict[str, list] = {}
    recurrence = None
    s = 0.0
    termination = None
    end_state = None
    max_iter = 10_000_000

    hops = 0
    for _ in range(max_iter):
        geo = surface.geometry[cid]
        hit = _ray_exit(geo, p, d, tol.tau_exit, tol.tau_hit)
        remaining = max_length - s
        if hit is None:
            # a state on a gluing edge pointing out of this chart expression
            # continues in the partner chart (zero-length crossing)
            oe = _outward_edge(geo, p, d, tol.tau_hit)
            if oe is not None and hops < 8:
                hops += 1
                nb = surface.edge_lookup[(cid, oe)]
                segments.append((cid, p, p))
                events.append(TraceEvent(EVENT_EDGE_CROSS, s, {
                    "gluing": nb.gluing_index, "side": nb.side,
                    "from_chart": cid, "from_edge": oe,
                    "to_chart": nb.chart, "to_edge": nb.edge}))
                transitions.append(nb.iso.inverse())
                cid, p, d = nb.chart, nb.iso.apply(p), nb.iso.rotate(d)
                continue
            if remaining > geo.diameter + 1.0:
                raise TraceNumericalError(
                    f"no chart exit from {p} along {d} in chart {cid!r}")
        if hit is None or hit[1] >= remaining:
            end = (p[0] + remaining * d[0], p[1] + remaining * d[1])
            if hit is None and not point_in_polygon(geo.vertices, end, tol.tau_hit):
                raise TraceNumericalError(
                    f"no chart exit from {p} along {d} in chart {cid!r}, "
                    f"yet the endpoint {end} leaves the chart")
            segments.append((cid, p, end))
            if tracker:
                tracker.add_segment(cid, p, end, s, max_length)
            s = max_length
            events.append(TraceEvent(EVENT_MAX_LENGTH, s, {}))
            termination = EVENT_MAX_LENGTH
            end_state = GeodesicState(cid, end, d, s)
            break

        edge, hs, hu = hit
        x = (p[0] + hs * d[0], p[1] + hs * d[1])
        vtx = None
        for cand in (edge, (edge + 1) % geo.n):
            v = geo.vertices[cand]
            if math.hypot(x[0] - v[0], x[1] - v[1]) <= tol.tau_hit:
                vtx = cand
                break

        if vtx is not None:
            v = (float(geo.vertices[vtx][0]), float(geo.vertices[vtx][1]))
            ds = math.hypot(v[0] - p[0], v[1] - p[1])
            if ds >= remaining:
                end = (p[0] + remaining * d[0], p[1] + remaining * d[1])
                segments.append((cid, p, end))
                if tracker:
                    tracker.add_segment(cid, p, end, s, max_length)
                s = max_length
                events.append(TraceEvent(EVENT_MAX_LENGTH, s, {}))
                termination = EVENT_MAX_LENGTH
                end_state = GeodesicState(cid, end, d, s)
                break
            segments.append((cid, p, v))
            if tracker:
                tracker.add_segment(cid, p, v, s, s + ds)
            s += ds
            hops = 0
            vc = surface.corner_class[(cid, vtx)]
            sector = continuation_sector(surface, vc.id, d, corner=(cid, vtx))
            terminal = vc.singular and (options.stop_on_cone or vc.kind != KIND_MARKED)
            kind = EVENT_CONE_HIT if vc.singular else EVENT_VERTEX_PASS
            events.append(TraceEvent(kind, s, {
                "vertex_class": vc.id, "chart": cid, "vertex": vtx,
                "incoming": d, "terminal": terminal, "sector": sector}))
            if terminal:
                termination = EVENT_CONE_HIT
                end_state = GeodesicState(cid, v, d, s)
                break
            # flat passage: unique straight continuation through a 2*pi corner
            t_in = vc.cone_coordinate(cid, vtx, (-d[0], -d[1]))
            t_out = (t_in + math.pi) % vc.angle
            ncid, nvtx, nd = vc.direction_at(t_out)
            nv = surface.geometry[ncid].vertices[nvtx]
            transitions.append(_vertex_alignment(v, (float(nv[0]), float(nv[1])), d, nd))
            cid, p, d = ncid, (float(nv[0]), float(nv[1])), nd
            if options.detect_recurrence and recurrence is None:
                hit_rec = _check_recurrence(crossings, cid, p, d, s, tol.tau_rec)
                if hit_rec is not None:
                    recurrence = hit_rec
                    events.append(TraceEvent(EVENT_SELF_RECURRENCE,
                                             recurrence["period"], dict(recurrence)))
                    if options.stop_on_recurrence:
                        termination = EVENT_SELF_RECURRENCE
                        end_state = GeodesicState(cid, p, d, s)
                        break
                else:
                    crossings.setdefault(cid, []).append([p[0], p[1], d[0], d[1], s])
            continue

        segments.append((cid, p, x))
        if tracker:
            tracker.add_segment(cid, p, x, s, s + hs)
        s += math.hypot(x[0] - p[0], x[1] - p[1])
        hops = 0
        nb = surface.edge_lookup[(cid, edge)]
        events.append(TraceEvent(EVENT_EDGE_CROSS, s, {
            "gluing": nb.gluing_index, "side": nb.side,
            "from_chart": cid, "from_edge": edge,
            "to_chart": nb.chart, "to_edge": nb.edge}))
        p2 = nb.iso.apply(x)
        d2 = nb.iso.rotate(d)
        transitions.append(nb.iso.inverse())
        if options.detect_recurrence and recurrence is None:
            hit_rec = _check_recurrence(crossings, nb.chart, p2, d2, s, tol.tau_rec)
            if hit_rec is not None:
                recurrence = hit_rec
                events.append(TraceEvent(EVENT_SELF_RECURRENCE,
                                         recurrence["period"], dict(recurrence)))
                if options.stop_on_recurrence:
                    termination = EVENT_SELF_RECURRENCE
                    end_state = GeodesicState(nb.chart, p2, d2, s)
                    break
            else:
                crossings.setdefault(nb.chart, []).append([p2[0], p2[1], d2[0], d2[1], s])
        cid, p, d = nb.chart, p2, d2
    else:
        raise TraceNumericalError("step budget exceeded; degenerate trajectory")

    events.sort(key=lambda e: e.arclength)
    if tracker and not tracker.series:
        tracker.add_segment(norm_start.chart, norm_start.point, norm_start.point, 0.0, 0.0)
    return TraceResult(
        start=norm_start, segments=segments, transitions=transitions,
        events=events, total_length=s, end_state=end_state,
        termination=termination, recurrence=recurrence,
        min_distance_series=tracker.series if tracker else [])


# -- developing map ---------------------------------------------------------------


@dataclass
class DevelopedPath:
    points: list                  # developed segment endpoints, start chart frame
    isometries: list              # per segment: Isometry chart frame -> developed frame
    total_length: float
    collinearity_residual: float  # max perpendicular deviation per unit length
    length_residual: float        # | |endpoint - start| - total_length |


def develop(trace_result: TraceResult) -> DevelopedPath:
    """Unfold a traced path into the plane of its starting chart.

    For a geodesic the developed polyline is a single straight segment; the
    reported residuals measure how far numerical transport strayed from that.
    """
    G = Isometry.identity()
    isos = [G]
    pts = [trace_result.segments[0][1]]
    for k, (cid, a, b) in enumerate(trace_result.segments):
        pts.append(G.apply(b))
        if k < len(trace_result.transitions):
            G = G.compose(trace_result.transitions[k])
            isos.append(G)
    p0, p1 = pts[0], pts[-1]
    total = trace_result.total_length
    chord = math.hypot(p1[0] - p0[0], p1[1] - p0[1])
    if chord > 0.0 and total > 0.0:
        ux, uy = (p1[0] - p0[0]) / chord, (p1[1] - p0[1]) / chord
        dev = max(abs((q[0] - p0[0]) * uy - (q[1] - p0[1]) * ux) for q in pts)
        resid = dev / total
    else:
        resid = 0.0
    return DevelopedPath(points=pts, isometries=isos, total_length=total,
                         collinearity_residual=resid,
                         length_residual=abs(chord - total))


# -- closed forms ------------------------------------------------------------------


def predict_self_intersection(closest_approach: float, angle: float) -> dict:
    """Self-intersection of a geodesic passing a cone point of angle < pi.

    A trajectory whose closest approach to the apex is ``closest_approach``
    crosses itself at parameter offsets +-closest_approach*tan(angle/2) around
    the foot, at distance closest_approach/cos(angle/2) from the apex.
    """
    if not 0.0 < angle < math.pi:
        raise AngleOutOfRange(
            f"self-intersection formulas hold for cone angles in (0, pi); got {angle}")
    if closest_approach <= 0.0 or not math.isfinite(closest_approach):
        raise DomainError(f"closest approach must be positive, got {closest_approach}")
    half = 0.5 * angle
    return {
        "parameter_offset": closest_approach * math.tan(half),
        "intersection_distance": closest_approach / math.cos(half),
    }


# -- distances ----------------------------------------------------------------------


def surface_point_distance(surface: ConeSurface, a, b, depth: int = 2) -> float:
    """Approximate surface distance between (chart, point) pairs via unfolding.

    Minimum straight-line distance over all developed copies of b's chart
    within ``depth`` gluing crossings of a's chart; inf when no copy exists.
    """
    (ca, pa), (cb, pb) = a, b
    best = math.inf
    for iso in surface.alignment_isos(ca, cb, depth):
        q = iso.apply(pb)
        dist = math.hypot(pa[0] - q[0], pa[1] - q[1])
        if dist < best:
            best = dist
    return best


@dataclass
class TwoSidedPath:
    """A trajectory extended both ways from an anchor state (parameter 0)."""

    forward: TraceResult
    backward: TraceResult

    def param_range(self) -> tuple[float, float]:
        return (-self.backward.total_length, self.forward.total_length)

    def positions(self, ts: np.ndarray):
        ts = np.asarray(ts, dtype=float)
        charts: list = [None] * len(ts)
        xy = np.empty((len(ts), 2))
        pos = ts >= 0.0
        if pos.any():
            c, p = self.forward.positions(ts[pos])
            xy[pos] = p
            for slot, cc in zip(np.nonzero(pos)[0], c):
                charts[slot] = cc
        neg = ~pos
        if neg.any():
            c, p = self.backward.positions(-ts[neg])
            xy[neg] = p
            for slot, cc in zip(np.nonzero(neg)[0], c):
                charts[slot] = cc
        return charts, xy


def two_sided_trace(surface: ConeSurface, state: GeodesicState, half_length: float, *,
                    options: TraceOptions = DEFAULT_TRACE_OPTIONS,
                    tolerances: Tolerances | None = None) -> TwoSidedPath:
    fwd = trace(surface, state, half_length, options=options, tolerances=tolerances)
    back_state = GeodesicState(state.chart, state.point,
                               (-state.direction[0], -state.direction[1]))
    bwd = trace(surface, back_state, half_length, options=options, tolerances=tolerances)
    return TwoSidedPath(fwd, bwd)


@dataclass
class DistanceResult:
    value: float
    truncation_bound: float
    window: tuple[float, float]
    step: float
    diameter_bound: float


def geodesic_distance(surface: ConeSurface, path1, path2,
                      window=5.0, anchor1: float = 0.0, anchor2: float = 0.0,
                      step: float | None = None, depth: int = 2,
                      diameter_bound: float | None = None) -> DistanceResult:
    """Exponentially weighted compact-open distance between two paths.

    Numerically integrates dist(path1(t), path2(t)) * exp(-|t|) over the
    window, with t measured from per-path anchors (arclengths; default the
    path starts). Pointwise distances use bounded unfolding and are capped at
    the diameter bound, whose tail contribution 2*D*exp(-W) is reported.
    """
    tol = surface.tolerances
    if step is None:
        step = tol.distance_step
    w0, w1 = (-float(window), float(window)) if np.isscalar(window) else (float(window[0]), float(window[1]))
    if not w0 < w1:
        raise DomainError(f"empty window ({w0}, {w1})")
    if diameter_bound is None:
        diameter_bound = sum(g.diameter for g in surface.geometry.values())
    for path, anchor, name in ((path1, anchor1, "path1"), (path2, anchor2, "path2")):
        lo, hi = path.param_range()
        if anchor + w0 < lo - 1e-9 or anchor + w1 > hi + 1e-9:
            raise InsufficientPath(
                f"{name} covers [{lo:.6g}, {hi:.6g}] but the window needs "
                f"[{anchor + w0:.6g}, {anchor + w1:.6g}]")

    count = max(2, int(round((w1 - w0) / step)) + 1)
    ts = np.linspace(w0, w1, count)
    c1, xy1 = path1.positions(ts + anchor1)
    c2, xy2 = path2.positions(ts + anchor2)

    def chart_dist(ca: str, cb: str, p1: np.ndarray, p2: np.ndarray) -> np.ndarray:
        isos = surface.alignment_isos(ca, cb, depth)
        if not isos:
            return np.full(len(p1), diameter_bound)
        best = np.full(len(p1), np.inf)
        for iso in isos:
            q = iso.apply_array(p2)
            best = np.minimum(best, np.hypot(p1[:, 0] - q[:, 0], p1[:, 1] - q[:, 1]))
        return np.minimum(best, diameter_bound)

    un1, un2 = sorted(set(c1)), sorted(set(c2))
    if len(un1) == 1 and len(un2) == 1:
        dists = chart_dist(un1[0], un2[0], xy1, xy2)
    else:
        arr1 = np.array(c1, dtype=object)
        arr2 = np.array(c2, dtype=object)
        code = np.zeros(len(ts), dtype=np.int64)
        for j, cc in enumerate(un1):
            code[arr1 == cc] += j * len(un2)
        for j, cc in enumerate(un2):
            code[arr2 == cc] += j
        dists = np.full(len(ts), diameter_bound)
        for key in np.unique(code):
            sel = code == key
            dists[sel] = chart_dist(un1[key // len(un2)], un2[key % len(un2)],
                                    xy1[sel], xy2[sel])

    i0 = int(np.argmin(np.abs(ts)))
    if not surface.alignment_isos(c1[i0], c2[i0], depth):
        raise IncomparableTraces(
            f"no chart alignment between {c1[i0]!r} and {c2[i0]!r} at time 0")

    value = float(_trapezoid(dists * np.exp(-np.abs(ts)), ts))
    w_eff = min(-w0, w1)
    bound = 2.0 * diameter_bound * math.exp(-w_eff)
    return DistanceResult(value, bound, (w0, w1), step, diameter_bound)


# -- min-distance experiment ----------------------------------------------------------


def min_singular_distance_up_to(surface: ConeSurface, trace_result: TraceResult,
                                T: float) -> float:
    """Exact distance from the path restricted to [0, T] to the singular set,
    within the one-ring candidate radius."""
    best = math.inf
    s0 = 0.0
    for cid, a, b in trace_result.segments:
        seg_len = math.hypot(b[0] - a[0], b[1] - a[1])
        if s0 >= T:
            break
        if s0 + seg_len > T:
            f = (T - s0) / seg_len
            b = (a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1]))
        cands = surface.singular_images(cid)
        dist = min_distance_to_points_on_segment(cands, a, b)
        if dist < best:
            best = dist
        s0 += seg_len
    return min(best, surface.max_diameter) if best < math.inf else math.inf


@dataclass
class MinDistanceReport:
    rows: list                # (length, min distance up to that length)
    threshold: float | None
    passed: bool
    trace: TraceResult


def min_distance_experiment(surface: ConeSurface, start: GeodesicState, lengths,
                            threshold: float | None = None, mode: str = "extended", *,
                            options: TraceOptions = DEFAULT_TRACE_OPTIONS,
                            tolerances: Tolerances | None = None) -> MinDistanceReport:
    """Trace once and tabulate m(T) = min distance to the singular set up to T.

    The tabulated sequence is non-increasing by construction. ``strict`` mode
    refuses surfaces with small singular classes, where generic trajectories
    terminate at cone points instead of accumulating near them.
    """
    if mode not in ("extended", "strict"):
        raise DomainError(f"mode must be 'extended' or 'strict', got {mode!r}")
    if mode == "strict":
        small = [vc.id for vc in surface.singular_classes if vc.kind not in (KIND_LARGE, KIND_MARKED)]
        if small:
            raise DomainError(f"strict mode requires no small singular classes; found {small}")
    lengths = sorted(float(L) for L in lengths)
    if not lengths or lengths[0] <= 0.0:
        raise DomainError("lengths must be positive")
    tr = trace(surface, start, lengths[-1], options=options, tolerances=tolerances)
    rows = [(L, min_singular_distance_up_to(surface, tr, min(L, tr.total_length)))
            for L in lengths]
    monotone = all(rows[i + 1][1] <= rows[i][1] + 1e-15 for i in range(len(rows) - 1))
    passed = monotone and (threshold is None or rows[-1][1] < threshold)
    return MinDistanceReport(rows=rows, threshold=threshold, passed=passed, trace=tr)

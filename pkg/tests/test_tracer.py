"""Geodesic tracing: events, development, sectors, distances, near-miss law."""

from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conesurf import (
    GeodesicState,
    build_surface,
    continuation_sector,
    develop,
    geodesic_distance,
    min_distance_experiment,
    predict_self_intersection,
    trace,
    two_sided_trace,
)
from conesurf.corpus import UNIT_SQUARE, doubled_right_triangle, regular_octagon
from conesurf.errors import (
    AngleOutOfRange,
    DomainError,
    IncomparableTraces,
    InsufficientPath,
    StartOutsideSurface,
    UnknownVertexClass,
    ZeroDirection,
)

import oracles

SQRT2 = math.sqrt(2.0)
GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0


def state(chart, x, y, dx, dy):
    n = math.hypot(dx, dy)
    return GeodesicState(chart, (x, y), (dx / n, dy / n), 0.0)


# --------------------------------------------------------------------------
# Event transcripts on the torus
# --------------------------------------------------------------------------

def test_horizontal_torus_transcript(torus):
    res = trace(torus, state("sq", 0.5, 0.5, 1, 0), 3.0)
    assert res.termination == "MaxLengthReached"
    assert [(e.kind, e.arclength) for e in res.events] == [
        ("EdgeCross", 0.5),
        ("SelfRecurrence", 1.0),
        ("EdgeCross", 1.5),
        ("EdgeCross", 2.5),
        ("MaxLengthReached", 3.0),
    ]
    assert res.end_state.chart == "sq"
    assert math.dist(res.end_state.point, (0.5, 0.5)) <= 1e-12
    assert res.end_state.direction == (1.0, 0.0)
    assert res.recurrence is not None
    assert math.isclose(res.recurrence["period"], 1.0)
    assert res.recurrence["matched_at"] < res.recurrence["detected_at"]


def test_edge_cross_detail_names_both_sides(torus):
    res = trace(torus, state("sq", 0.5, 0.5, 0, 1), 0.75)
    cross = next(e for e in res.events if e.kind == "EdgeCross")
    d = cross.detail
    assert d["from_chart"] == d["to_chart"] == "sq"
    assert {d["from_edge"], d["to_edge"]} == {0, 2}
    assert d["side"] in ("a", "b")
    assert torus.gluings[d["gluing"]].index == d["gluing"]


def test_diagonal_hits_marked_cone_point(mtorus):
    res = trace(mtorus, state("sq", 0.5, 0.5, 1, 1), 3.0)
    assert res.termination == "ConeHit"
    (hit,) = [e for e in res.events if e.kind == "ConeHit"]
    assert math.isclose(hit.arclength, SQRT2 / 2, rel_tol=1e-12)
    assert hit.detail["terminal"] is True
    assert hit.detail["vertex_class"] == "v0"
    assert math.isclose(res.total_length, SQRT2 / 2, rel_tol=1e-12)


def test_diagonal_passes_unmarked_corner(torus):
    res = trace(torus, state("sq", 0.5, 0.5, 1, 1), 3.0)
    assert res.termination == "MaxLengthReached"
    passes = [e for e in res.events if e.kind == "VertexPass"]
    assert [round(e.arclength, 12) for e in passes] == [
        round(SQRT2 / 2, 12), round(3 * SQRT2 / 2, 12)]
    assert all(not e.detail["terminal"] for e in passes)
    # Straight continuation through a 2*pi corner preserves the direction.
    assert math.isclose(res.end_state.direction[0], 1 / SQRT2, abs_tol=1e-12)
    assert math.isclose(res.end_state.direction[1], 1 / SQRT2, abs_tol=1e-12)


def test_trace_start_validation(torus):
    with pytest.raises(StartOutsideSurface):
        trace(torus, GeodesicState("sq", (1.5, 0.5), (1.0, 0.0), 0.0), 1.0)
    with pytest.raises(StartOutsideSurface):
        trace(torus, GeodesicState("nope", (0.5, 0.5), (1.0, 0.0), 0.0), 1.0)
    with pytest.raises(ZeroDirection):
        trace(torus, GeodesicState("sq", (0.5, 0.5), (0.0, 0.0), 0.0), 1.0)


# --------------------------------------------------------------------------
# Development into the plane
# --------------------------------------------------------------------------

def test_develop_straightens_torus_loop(torus):
    res = trace(torus, state("sq", 0.5, 0.5, 1, 0), 3.0)
    dev = develop(res)
    assert math.dist(dev.points[-1], (3.5, 0.5)) <= 1e-12
    assert dev.collinearity_residual <= 1e-12
    assert dev.length_residual <= 1e-12
    assert len(dev.isometries) == len(res.segments)


def test_develop_long_octagon_path(octagon):
    res = trace(octagon, state("oct", 0.0, 0.0, 1.0, math.pi / 10), 50.0)
    dev = develop(res)
    assert dev.collinearity_residual <= 1e-8 * max(1.0, res.total_length)
    assert dev.length_residual <= 1e-7
    # Independent high-precision recomposition of the same transcript.
    assert oracles.recompose_development(res) <= 1e-6


def test_transitions_map_segment_endpoints(octagon):
    res = trace(octagon, state("oct", 0.1, 0.2, 3.0, 1.0), 10.0)
    assert len(res.transitions) == len(res.segments) - 1
    for k, iso in enumerate(res.transitions):
        end_prev = res.segments[k][2]
        start_next = res.segments[k + 1][1]
        assert math.dist(iso.apply(start_next), end_prev) <= 1e-9


# --------------------------------------------------------------------------
# Continuation sectors
# --------------------------------------------------------------------------

def _mid_wedge_incoming(surface, class_id, wedge=0):
    vc = surface.vertex_classes[class_id]
    chart, vertex, u = vc.direction_at(vc.offsets[wedge] + 0.5 * vc.angles[wedge])
    return (chart, vertex), (-u[0], -u[1])


def test_sector_width_law(mtorus, octagon, pcase):
    # Width is exactly max(0, angle - 2*pi).
    corner, incoming = _mid_wedge_incoming(octagon, "v0")
    sec = continuation_sector(octagon, "v0", incoming, corner=corner)
    assert sec.width == 4 * math.pi
    assert sec.angle == 6 * math.pi

    corner, incoming = _mid_wedge_incoming(pcase, "v0")
    assert continuation_sector(pcase, "v0", incoming, corner=corner).width == 0.0

    corner, incoming = _mid_wedge_incoming(mtorus, "v0")
    sec = continuation_sector(mtorus, "v0", incoming, corner=corner)
    assert sec.width == 0.0
    # The empty sector is centered on the straight continuation.
    straight = math.fmod(sec.incoming_coordinate + sec.angle / 2, sec.angle)
    assert math.isclose(sec.start, straight, rel_tol=1e-12)


def test_sector_unknown_class(torus):
    with pytest.raises(UnknownVertexClass):
        continuation_sector(torus, "v99", (1.0, 0.0))


def test_sector_rejects_direction_outside_wedge(octagon):
    corner, incoming = _mid_wedge_incoming(octagon, "v0")
    with pytest.raises(ValueError):
        continuation_sector(octagon, "v0", (-incoming[0], -incoming[1]), corner=corner)


# --------------------------------------------------------------------------
# Self-intersection near a small cone point
# --------------------------------------------------------------------------

def test_predicted_self_intersection_spots():
    out = predict_self_intersection(1.0, math.pi / 2)
    assert math.isclose(out["parameter_offset"], 1.0, rel_tol=1e-12)
    assert math.isclose(out["intersection_distance"], SQRT2, rel_tol=1e-12)
    out = predict_self_intersection(2.0, 2 * math.pi / 3)
    assert math.isclose(out["parameter_offset"], 2 * math.sqrt(3.0), rel_tol=1e-12)
    assert math.isclose(out["intersection_distance"], 4.0, rel_tol=1e-12)


@pytest.mark.parametrize("bad", [0.0, math.pi, -0.25, 4.0])
def test_predicted_self_intersection_domain(bad):
    with pytest.raises(AngleOutOfRange):
        predict_self_intersection(1.0, bad)


def find_self_intersections(path):
    """All transverse crossings between the forward and backward branches.

    Returns (forward_arclength, backward_arclength, chart, point) tuples,
    skipping the shared start point.
    """
    hits = []

    def arcs(result):
        out, s = [], 0.0
        for chart, a, b in result.segments:
            out.append((chart, a, b, s))
            s += math.dist(a, b)
        return out

    for cf, af, bf, sf in arcs(path.forward):
        for cb, ab, bb, sb in arcs(path.backward):
            if cf != cb:
                continue
            hit = oracles.segment_intersection(af, bf, ab, bb)
            if hit is None:
                continue
            t_f = sf + hit[0] * math.dist(af, bf)
            t_b = sb + hit[1] * math.dist(ab, bb)
            if t_f < 1e-9 and t_b < 1e-9:
                continue  # the branches share their start
            hits.append((t_f, t_b, cf, hit[2]))
    return hits


def test_traced_self_intersection_matches_prediction(dtriangle):
    # Geodesic passing the pi/2 cone point (chart origin) at distance 1.
    apex = next(vc for vc in dtriangle.vertex_classes.values()
                if math.isclose(vc.angle, math.pi / 2, rel_tol=1e-12))
    c0 = 1.0
    chart, vertex, u = apex.direction_at(apex.offsets[0] + math.pi / 16)
    foot = (c0 * u[0], c0 * u[1])
    perp = (-u[1], u[0])
    path = two_sided_trace(dtriangle, GeodesicState(chart, foot, perp, 0.0), 3.0)

    hits = find_self_intersections(path)
    assert len(hits) == 1
    t_f, t_b, hit_chart, point = hits[0]
    predicted = predict_self_intersection(c0, apex.angle)
    # Arc length from the closest-approach foot, on both branches.
    assert math.isclose(t_f, predicted["parameter_offset"], abs_tol=1e-6)
    assert math.isclose(t_b, predicted["parameter_offset"], abs_tol=1e-6)
    # Both charts place the apex at their origin.
    assert math.isclose(math.hypot(*point), predicted["intersection_distance"],
                        abs_tol=1e-6)


# --------------------------------------------------------------------------
# Distance to the singular set along a trajectory
# --------------------------------------------------------------------------

def test_min_distance_series_horizontal(mtorus):
    rep = min_distance_experiment(mtorus, state("sq", 0.5, 0.5, 1, 0),
                                  [1.0, 2.0, 5.0], threshold=0.6)
    assert [(L, round(m, 12)) for L, m in rep.rows] == [
        (1.0, 0.5), (2.0, 0.5), (5.0, 0.5)]
    assert rep.passed
    rep = min_distance_experiment(mtorus, state("sq", 0.5, 0.5, 1, 0),
                                  [1.0], threshold=0.4)
    assert not rep.passed


def test_min_distance_series_non_increasing(mtorus):
    start = state("sq", SQRT2 - 1, math.sqrt(3) - 1, 1, GOLDEN)
    rep = min_distance_experiment(mtorus, start, [2.0, 5.0, 10.0, 20.0])
    values = [m for _, m in rep.rows]
    assert all(b <= a + 1e-15 for a, b in zip(values, values[1:]))
    tr = rep.trace
    assert math.isclose(tr.min_distance_at(20.0), values[-1], rel_tol=1e-9)
    assert tr.min_distance_at(2.0) >= tr.min_distance_at(20.0)


def test_min_distance_matches_lattice_oracle(mtorus):
    start = (SQRT2 - 1, math.sqrt(3) - 1)
    direction = (1.0 / math.hypot(1.0, GOLDEN), GOLDEN / math.hypot(1.0, GOLDEN))
    rep = min_distance_experiment(
        mtorus, GeodesicState("sq", start, direction, 0.0), [5.0, 10.0, 25.0])
    for L, m in rep.rows:
        expected = oracles.lattice_segment_min_distance(start, direction, L)
        assert math.isclose(m, expected, rel_tol=0, abs_tol=1e-9)


def test_min_distance_strict_mode_refuses_small_cones(pcase, mtorus):
    with pytest.raises(DomainError, match="strict"):
        min_distance_experiment(pcase, state("front", 0.5, 0.5, 1, GOLDEN),
                                [5.0], mode="strict")
    rep = min_distance_experiment(mtorus, state("sq", 0.3, 0.4, 1, GOLDEN),
                                  [5.0], mode="strict")
    assert rep.rows[0][1] > 0.0
    with pytest.raises(DomainError):
        min_distance_experiment(mtorus, state("sq", 0.3, 0.4, 1, 0), [5.0],
                                mode="banana")
    with pytest.raises(DomainError):
        min_distance_experiment(mtorus, state("sq", 0.3, 0.4, 1, 0), [])


# --------------------------------------------------------------------------
# Weighted distance between paths
# --------------------------------------------------------------------------

def test_geodesic_distance_identical_paths_is_zero(torus):
    p = two_sided_trace(torus, state("sq", 0.5, 0.25, 1, 0), 6.0)
    d = geodesic_distance(torus, p, p, window=5.0)
    assert d.value == 0.0
    assert d.truncation_bound > 0.0


def test_geodesic_distance_parallel_offset(torus):
    # Constant separation c integrates to 2c(1 - exp(-W)).
    p1 = two_sided_trace(torus, state("sq", 0.5, 0.25, 1, 0), 6.0)
    p2 = two_sided_trace(torus, state("sq", 0.5, 0.35, 1, 0), 6.0)
    for window in (2.0, 5.0):
        d = geodesic_distance(torus, p1, p2, window=window)
        expected = 2 * 0.1 * (1 - math.exp(-window))
        assert math.isclose(d.value, expected, abs_tol=1e-6)


def test_geodesic_distance_requires_enough_path(torus):
    p = two_sided_trace(torus, state("sq", 0.5, 0.25, 1, 0), 2.0)
    with pytest.raises(InsufficientPath):
        geodesic_distance(torus, p, p, window=5.0)


def test_geodesic_distance_incomparable_components():
    polys = [("a", UNIT_SQUARE),
             ("b", [(3.0, 0.0), (4.0, 0.0), (4.0, 1.0), (3.0, 1.0)])]
    gluings = [(("a", 0), ("a", 2)), (("a", 1), ("a", 3)),
               (("b", 0), ("b", 2)), (("b", 1), ("b", 3))]
    s = build_surface(polys, gluings, allow_disconnected=True)
    p1 = two_sided_trace(s, state("a", 0.5, 0.5, 1, 0), 3.0)
    p2 = two_sided_trace(s, state("b", 3.5, 0.5, 1, 0), 3.0)
    with pytest.raises(IncomparableTraces):
        geodesic_distance(s, p1, p2, window=2.0)


# --------------------------------------------------------------------------
# Property: random traces develop onto straight lines
# --------------------------------------------------------------------------

OCT = regular_octagon()
APOTHEM = math.cos(math.pi / 8)


@settings(max_examples=60, deadline=None)
@given(r=st.floats(0.0, 0.85 * APOTHEM), pos=st.floats(0.0, 2 * math.pi),
       ang=st.floats(0.0, 2 * math.pi), length=st.floats(0.5, 20.0))
def test_random_octagon_traces_develop_straight(r, pos, ang, length):
    start = GeodesicState("oct", (r * math.cos(pos), r * math.sin(pos)),
                          (math.cos(ang), math.sin(ang)), 0.0)
    res = trace(OCT, start, length)
    dev = develop(res)
    assert dev.collinearity_residual <= 1e-8 * max(1.0, res.total_length)
    assert dev.length_residual <= 1e-7
    seg_total = sum(math.dist(a, b) for _, a, b in res.segments)
    assert math.isclose(seg_total, res.total_length, rel_tol=0, abs_tol=1e-7)

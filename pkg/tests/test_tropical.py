import dataclasses
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from tropmirror import linalg as la
from tropmirror.affine_complex import AffineComplex, classify_vertex, discriminant_locus
from tropmirror.lattice import GeometryError
from tropmirror.tropical import (
    GAMMA_RULES,
    GammaRef,
    TropicalEdge,
    TropicalGraph,
    TropicalVertex,
    dumps_curve,
    focus_focus_leg,
    invariant_sublattice,
    loads_curve,
    tropical_line,
    validate,
)

GL2 = [((1, 0), (0, 1)), ((0, 1), (1, 0)), ((1, 1), (0, 1)), ((2, 1), (1, 1)), ((1, 0), (-3, 1)), ((-1, 0), (0, -1))]


def test_weight_one_line_is_balanced():
    curve, cx = tropical_line()
    report = validate(curve, cx)
    assert report.valid
    assert report.verdict(0).kind == "smooth" and report.verdict(0).total == (0, 0)
    assert [report.verdict(i).kind for i in (1, 2, 3)] == ["end"] * 3


@pytest.mark.parametrize("weights,deficit", [((2, 1, 1), (1, 0)), ((1, 2, 1), (0, 1)), ((1, 1, 2), (-1, -1))])
def test_perturbed_line_reports_deficit(weights, deficit):
    curve, cx = tropical_line(weights)
    report = validate(curve, cx)
    assert not report.valid
    assert report.verdict(0).total == deficit
    assert report.verdict(0).reason == "unbalanced"


def test_focus_focus_leg_validates_iff_invariant():
    curve, cx = focus_focus_leg(True)
    assert validate(curve, cx).valid
    curve, cx = focus_focus_leg(False)
    report = validate(curve, cx)
    assert not report.valid
    assert report.verdict(1).reason == "leg direction is not monodromy invariant"


@pytest.mark.parametrize("n", [1, 2, -1])
def test_focus_focus_invariant_lattice(n):
    _, cx = focus_focus_leg(True, n)
    for cell in (0, 1):
        lat = invariant_sublattice(cx, GammaRef("flag", 0), cell)
        # a shear fixes exactly the line of the wall
        assert [la.primitive(v) for v in lat.invariant] in ([(1, 0)], [(-1, 0)])
        assert len(lat.dual_invariant) == 1 and len(lat.balancing_group) == 1


def test_gamma_rules_differ_on_an_invariant_leg():
    # the leg pushes (1,0) into the singular point: absorbed by the literal rule only
    curve, cx = focus_focus_leg(True)
    assert validate(curve, cx, "literal").valid
    strict = validate(curve, cx, "strict")
    assert not strict.valid and strict.verdict(1).kind == "gamma"
    assert set(GAMMA_RULES) == {"literal", "strict"}


def test_leg_through_gamma_interior_is_rejected():
    # from the upper cell across the wall barycenter into the lower cell
    _, cx = focus_focus_leg(True)
    verts = [TropicalVertex(0, 0, (Fraction(1, 2), Fraction(1, 2)), end=True),
             TropicalVertex(1, 1, (Fraction(1, 2), Fraction(-1, 2)), end=True)]
    curve = TropicalGraph(verts, [TropicalEdge(0, 1, 1, (0, -1))])
    with pytest.raises(GeometryError, match="crosses the discriminant"):
        validate(curve, cx)


def test_malformed_curves():
    curve, cx = tropical_line()
    bad = dataclasses.replace(curve.edges[0], direction=(2, 0))
    with pytest.raises(GeometryError, match="not primitive"):
        validate(TropicalGraph(curve.vertices, [bad] + curve.edges[1:]), cx)
    bad = dataclasses.replace(curve.edges[0], direction=(0, 1))
    with pytest.raises(GeometryError, match="not tangent"):
        validate(TropicalGraph(curve.vertices, [bad] + curve.edges[1:]), cx)
    bad = dataclasses.replace(curve.edges[0], weight=0)
    with pytest.raises(GeometryError, match="positive"):
        validate(TropicalGraph(curve.vertices, [bad] + curve.edges[1:]), cx)
    with pytest.raises(GeometryError, match="not connected"):
        validate(TropicalGraph(curve.vertices, curve.edges[1:]), cx)
    outside = dataclasses.replace(curve.vertices[1], coords=(5, 1))
    with pytest.raises(GeometryError, match="does not lie"):
        validate(TropicalGraph([curve.vertices[0], outside] + curve.vertices[2:], curve.edges), cx)


@given(st.lists(st.sampled_from(GL2), min_size=3, max_size=3), st.lists(st.integers(0, 2), min_size=3, max_size=3))
def test_verdict_is_independent_of_charts(charts, frames):
    curve, cx = tropical_line((2, 1, 1))
    recharted = AffineComplex(cx.cells, [], {(0, k): charts[k] for k in range(3)})
    edges = []
    for e, k in zip(curve.edges, frames):
        d = la.matvec(charts[k], e.direction)
        edges.append(dataclasses.replace(e, direction=d, frame=recharted.corner_vertex[(0, k)]))
    a = validate(curve, cx)
    b = validate(TropicalGraph(curve.vertices, edges), recharted)
    assert [(v.balanced, v.total) for v in a.verdicts] == [(v.balanced, v.total) for v in b.verdicts]


@given(st.integers(0, 2), st.integers(1, 3))
def test_subdividing_an_edge_keeps_verdicts(which, weight_scale):
    curve, cx = tropical_line(tuple(weight_scale for _ in range(3)))
    e = curve.edges[which]
    a, b = curve.vertex(e.start), curve.vertex(e.end)
    mid = tuple((x + y) / 2 for x, y in zip(a.coords, b.coords))
    new = TropicalVertex(99, 0, mid)
    edges = [x for x in curve.edges if x is not e]
    edges += [dataclasses.replace(e, end=99), dataclasses.replace(e, start=99)]
    report = validate(TropicalGraph(curve.vertices + [new], edges), cx)
    assert report.valid and report.verdict(99).total == (0, 0)


@given(st.sets(st.integers(0, 2)), st.tuples(st.integers(1, 3), st.integers(1, 3), st.integers(1, 3)))
def test_reversing_edges_keeps_verdicts(flip, weights):
    curve, cx = tropical_line(weights)
    edges = [dataclasses.replace(e, start=e.end, end=e.start, direction=la.vscale(-1, e.direction))
             if i in flip else e for i, e in enumerate(curve.edges)]
    a, b = validate(curve, cx), validate(TropicalGraph(curve.vertices, edges), cx)
    assert [(v.balanced, v.total) for v in a.verdicts] == [(v.balanced, v.total) for v in b.verdicts]


def test_curve_json_round_trip():
    for curve, _ in (tropical_line((2, 1, 1)), focus_focus_leg(False)):
        again = loads_curve(dumps_curve(curve))
        assert again == curve


def test_legs_shorthand():
    text = ('{"vertices": [{"id": 0, "cell": 0, "coords": ["0", "0"], "end": true}],'
            ' "legs": [{"vertex": 0, "gamma": {"kind": "flag", "index": 0}, "direction": [1, 0]}]}')
    curve = loads_curve(text)
    _, cx = focus_focus_leg(True)
    assert len(curve.legs) == 1 and validate(curve, cx).valid


def test_quintic_node_lattices(quintic_b):
    nodes = discriminant_locus(quintic_b).trivalent_nodes()
    seen = set()
    for node in nodes:
        kind = classify_vertex(quintic_b, node)
        if kind in seen:
            continue
        seen.add(kind)
        cell = quintic_b.cells_containing(node)[0]
        lat = invariant_sublattice(quintic_b, GammaRef("node", node), cell)
        # positive: I + w f fixes ker f (rank 2); negative: I + u f_i fixes one line
        assert len(lat.invariant) == (2 if kind == "positive" else 1)
        if len(seen) == 2:
            break
    assert seen == {"positive", "negative"}

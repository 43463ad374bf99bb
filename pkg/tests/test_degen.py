import itertools
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from tropmirror import linalg as la
from tropmirror.affine_complex import build_complex, cycle_of_segments, focus_focus_pair
from tropmirror.degen import (
    cone_picture_monoid,
    cone_picture_strata,
    dual_face_map,
    fan_picture_strata,
    ghost_stalk,
    hilbert_basis,
    is_face,
    local_model_slice,
    positivity_2d,
    vertex_fan,
)
from tropmirror.lattice import Cone, GeometryError, LatticePolytope, lattice_points
from tropmirror.legendre import cone_mpl, discrete_legendre

SQUARE_CONE = [(0, 0, 1), (1, 0, 1), (0, 1, 1), (1, 1, 1)]


def irreducibles(generators, rank, reach):
    """Independent oracle: nonzero cone points in a box that are not the sum of
    two nonzero cone points."""
    cone = Cone.spanned_by(generators, rank)
    box = [x for x in itertools.product(range(-reach, reach + 1), repeat=rank) if any(x) and cone.contains(x)]
    members = set(box)
    return sorted(x for x in box if not any(la.vsub(x, y) in members for y in box if y != x))


@pytest.mark.parametrize("n", [1, 2, 5])
def test_fan_strata_of_circle(n):
    poset = fan_picture_strata(cycle_of_segments(n))
    assert poset.counts() == {0: n, 1: n}
    assert len(poset.components()) == n
    assert not poset.boundary
    # each segment stratum lies in the strata of its end points (the same point when n = 1)
    assert len(poset.order) == (2 * n if n > 1 else 1)


def test_vertex_fan_of_circle_is_complete():
    cx = cycle_of_segments(3)
    vf = vertex_fan(cx, cx.vertices[0])
    assert vf.fan.is_complete and sorted(vf.fan.rays) == [(-1,), (1,)]


def test_boundary_is_reported():
    cx = build_complex([[(0,), (1,)], [(0,), (1,)]], [(0, 1, [(1, 0)])])
    assert fan_picture_strata(cx).boundary


def test_fan_and_cone_pictures_are_dual_on_quintic(quintic_faces):
    phi = cone_mpl(quintic_faces)
    dual = discrete_legendre(quintic_faces, phi)
    fan = fan_picture_strata(quintic_faces)
    cone = cone_picture_strata(dual.complex)
    assert fan.counts() == cone.counts() == {0: 5, 1: 10, 2: 10, 3: 5}
    match = dual_face_map(quintic_faces, phi, dual)
    assert len(match) == len(quintic_faces.faces)
    fan_dim = {s.face: s.dim for s in fan.strata}
    cone_dim = {s.face: s.dim for s in cone.strata}
    for f, g in match.items():
        assert fan_dim[f] == cone_dim[g]
    # inclusion reverses
    fan_order = {(match[a], match[b]) for a, b in fan.order}
    assert fan_order == set(cone.order)


def test_cone_strata_carry_cells():
    cx = cycle_of_segments(2)
    poset = cone_picture_strata(cx)
    assert poset.counts() == {0: 2, 1: 2}
    assert all(isinstance(s.data, LatticePolytope) for s in poset.strata)


def test_hilbert_basis_known_cases():
    assert hilbert_basis([(1, 0), (0, 1)], 2) == [(0, 1), (1, 0)]
    assert hilbert_basis([(1, 0), (1, 2)], 2) == [(1, 0), (1, 1), (1, 2)]
    # (2,-1) lies outside; (1,0) = ((0,1) + (3,-1)) / 3 is new
    assert hilbert_basis([(0, 1), (3, -1)], 2) == [(0, 1), (1, 0), (3, -1)]
    with pytest.raises(GeometryError):
        hilbert_basis([(1, 0, 0), (0, 1, 0)], 3)


@given(st.tuples(st.integers(-3, 3), st.integers(-3, 3)), st.tuples(st.integers(-3, 3), st.integers(-3, 3)))
def test_hilbert_basis_matches_irreducible_oracle(a, b):
    if la.det([a, b]) == 0:
        return
    assert hilbert_basis([a, b], 2) == irreducibles([a, b], 2, 6)


@given(st.lists(st.tuples(st.integers(-2, 2), st.integers(-2, 2)), min_size=3, max_size=6))
def test_degree_one_hilbert_elements_are_lattice_points(pts):
    if la.rank([la.vsub(p, pts[0]) for p in pts[1:]]) < 2:
        return
    poly = LatticePolytope(pts)
    basis = hilbert_basis([v + (1,) for v in poly.vertices], 3)
    assert sorted(x[:2] for x in basis if x[2] == 1) == lattice_points(poly)


def test_ghost_stalk_fixtures():
    # tau = {0}: nothing to map
    trivial = ghost_stalk([(1, 0), (0, 1)], [(0, 0)])
    assert trivial.is_trivial and trivial.generators == []
    # tau = sigma = quadrant: N^2
    quadrant = ghost_stalk([(1, 0), (0, 1)], [(1, 0), (0, 1)])
    assert quadrant.generators == [(0, 1), (1, 0)] and quadrant.is_free and quadrant.relations == []
    # cone over the unit square: four generators, one relation
    square = ghost_stalk(SQUARE_CONE, SQUARE_CONE)
    assert len(square.generators) == 4 and not square.is_free
    assert len(square.relations) == 1
    (rel,) = square.relations
    assert la.vec(la.matvec(la.transpose(square.generators), rel)) == (0, 0, 0)
    assert square.generators == irreducibles(square.cone, 3, 2)


def test_ghost_stalk_on_a_ray_face():
    stalk = ghost_stalk([(1, 0), (0, 1)], [(1, 0)])
    assert stalk.rank == 1 and stalk.generators == [(1,)]


def test_non_face_is_rejected():
    assert not is_face([(1, 0), (0, 1)], [(1, 1)], 2)
    assert is_face(SQUARE_CONE, [(0, 0, 1), (1, 0, 1)], 3)
    assert not is_face(SQUARE_CONE, [(0, 0, 1), (1, 1, 1)], 3)
    with pytest.raises(GeometryError, match="not a face"):
        ghost_stalk([(1, 0), (0, 1)], [(1, 1)])


def test_cone_picture_monoid():
    seg = cone_picture_monoid(LatticePolytope([(0,), (1,)]))
    assert seg.generators == [(0, 1), (1, 1)]
    square = cone_picture_monoid(LatticePolytope([(0, 0), (1, 0), (0, 1), (1, 1)]))
    assert len(square.in_degree(1)) == 4 and not square.in_degree(2)
    assert len(square.relations) == 1
    double = cone_picture_monoid(LatticePolytope([(0, 0), (2, 0), (0, 2)]))
    assert len(double.generators) == 6
    # a non-normal-looking case: the lattice triangle with an interior point generated in degree 1
    tri = cone_picture_monoid(LatticePolytope([(-1, -1), (1, 0), (0, 1)]))
    assert len(tri.in_degree(1)) == 4 and not tri.in_degree(2)


def test_slice_of_segment():
    s = local_model_slice(LatticePolytope([(0,), (1,)]), Fraction(1, 4))
    assert s.polytope.vertices == ((Fraction(1, 4),), (Fraction(3, 4),))


@given(st.fractions(Fraction(1, 100), Fraction(99, 100)))
def test_slice_of_standard_triangle(c):
    # the cone over the standard triangle is unimodular: x >= c, y >= c, x + y <= 1 - c
    s = local_model_slice(LatticePolytope([(0, 0), (1, 0), (0, 1)]), c)
    if c < Fraction(1, 3):
        assert set(s.polytope.vertices) == {(c, c), (1 - 2 * c, c), (c, 1 - 2 * c)}
    else:
        assert s.is_empty


@given(st.fractions(Fraction(1, 50), Fraction(49, 50)), st.fractions(Fraction(1, 50), Fraction(49, 50)))
def test_slices_shrink_as_c_grows(c1, c2):
    sigma = LatticePolytope([(0, 0), (2, 0), (0, 1), (1, 1)])
    lo, hi = sorted((c1, c2))
    small, big = local_model_slice(sigma, hi), local_model_slice(sigma, lo)
    if small.is_empty:
        return
    assert not big.is_empty
    assert all(big.polytope.contains(v) for v in small.polytope.vertices)
    assert all(sigma.contains(v) for v in big.polytope.vertices)


def test_slice_parameter_range():
    with pytest.raises(GeometryError):
        local_model_slice(LatticePolytope([(0,), (1,)]), 1)


@pytest.mark.parametrize("n,expected", [(1, True), (3, True), (-1, False), (0, True)])
def test_positivity_on_focus_focus_pairs(n, expected):
    report = positivity_2d(focus_focus_pair(n))
    assert report.positive is expected
    assert list(report.numbers.values()) == ([] if n == 0 else [n])


def test_quartic_has_24_positive_focus_focus_points(quartic_b):
    report = positivity_2d(quartic_b)
    assert len(report.numbers) == 24
    assert set(report.numbers.values()) == {1} and report.positive


def test_positivity_needs_dimension_two():
    with pytest.raises(GeometryError):
        positivity_2d(cycle_of_segments(2))

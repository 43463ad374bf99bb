from fractions import Fraction
from math import comb

import pytest

from tropmirror import linalg as la
from tropmirror.batyrev import (
    BatyrevInput,
    check_subdivision,
    decompose_vertex,
    hodge_oracle,
    input_from_json,
    load_triangulation,
    phi_check,
    quartic_delta,
    quintic_delta,
)
from tropmirror.affine_complex import discriminant_locus
from tropmirror.lattice import (
    GeometryError,
    LatticePolytope,
    dual_polytope,
    interior_lattice_points,
    lattice_points,
    normalized_volume,
)
from tropmirror.plfun import PLFunction


def euler(fv):
    return sum((-1) ** i * x for i, x in enumerate(fv))


def test_quintic_faces_complex_is_boundary_of_simplex(quintic_faces):
    # boundary of a 4-simplex: C(5, k+1) faces of dimension k
    assert quintic_faces.f_vector() == tuple(comb(5, k + 1) for k in range(4))
    assert quintic_faces.is_closed
    # three flags per 2-face
    assert len(discriminant_locus(quintic_faces).flags) == 30


def test_quintic_triangulated_complex(quintic_b):
    nabla = dual_polytope(quintic_delta())
    boundary_points = len(lattice_points(nabla)) - len(interior_lattice_points(nabla))
    fv = quintic_b.f_vector()
    assert fv[0] == boundary_points == 125
    # a unimodular triangulation has as many tetrahedra as normalized volume
    facet_volume = sum(normalized_volume_of_facet(nabla, vs) for vs in nabla.facet_vertex_sets)
    assert fv[3] == facet_volume == 625
    assert euler(fv) == 0 and quintic_b.is_closed


def normalized_volume_of_facet(poly, vs):
    pts = [poly.vertices[i] for i in sorted(vs)]
    basis = la.saturated_span([la.vsub(p, pts[0]) for p in pts[1:]], poly.rank)
    local = [la.solve(la.transpose(basis), la.vsub(p, pts[0])) for p in pts]
    return normalized_volume(LatticePolytope(local))


def test_quartic_triangulated_complex_is_a_sphere(quartic_b):
    fv = quartic_b.f_vector()
    assert fv[0] == comb(7, 3) - 1
    assert euler(fv) == 2


def test_bundled_triangulations_use_boundary_points():
    for name, delta in (("quintic", quintic_delta()), ("quartic", quartic_delta())):
        nabla = dual_polytope(delta)
        cells = load_triangulation(name)
        pts = {p for c in cells for p in c}
        assert all(nabla.contains(p) and not nabla.interior_contains(p) for p in pts)
        assert all(len(c) == nabla.rank for c in cells)


def test_charts_are_projections_along_the_decomposed_vertex(quintic_faces):
    nabla = dual_polytope(quintic_delta())
    inp = BatyrevInput(quintic_delta())
    for v in nabla.vertices:
        # h-check = phi-check: h' = 0, so v decomposes as v' = v
        assert decompose_vertex(v, nabla, inp.newton_prime) == v


def test_doubled_function_gives_same_combinatorics(quintic_faces):
    inp = input_from_json({"delta": "quintic", "h_check": {"multiple": 2}})
    nabla = dual_polytope(quintic_delta())
    assert inp.newton_prime.vertices == nabla.vertices
    assert inp.newton.vertices == tuple(la.vscale(2, v) for v in nabla.vertices)
    for v in inp.newton.vertices:
        assert decompose_vertex(v, nabla, inp.newton_prime) == la.vscale(Fraction(1, 2), v)


def test_hodge_oracle_mirror_symmetry():
    delta = quintic_delta()
    assert hodge_oracle(delta) == (101, 1)
    assert hodge_oracle(dual_polytope(delta)) == (1, 101)
    with pytest.raises(GeometryError):
        hodge_oracle(quartic_delta())


def test_hodge_oracle_h11_counts_nabla_points():
    # for a simplex nabla without points in facet interiors the count is
    # (points of nabla) - 5 minus the facet-interior points, here 126 - 5 - 20
    nabla = dual_polytope(quintic_delta())
    facet_interior = 0
    for vs in nabla.facet_vertex_sets:
        pts = [nabla.vertices[i] for i in vs]
        face = LatticePolytope(pts, rank=4)
        facet_interior += len(interior_lattice_points(face))
    assert facet_interior == 20
    assert hodge_oracle(quintic_delta())[0] == len(lattice_points(nabla)) - 5 - facet_interior


def test_input_validation():
    with pytest.raises(GeometryError, match="not reflexive"):
        BatyrevInput(LatticePolytope([(2, 0), (0, 2), (-2, -2)]))
    delta = quartic_delta()
    phi = phi_check(delta)
    with pytest.raises(GeometryError, match="strictly convex"):
        BatyrevInput(delta, h_check=PLFunction.zero(phi.fan))
    with pytest.raises(GeometryError, match="boundary points"):
        BatyrevInput(delta, nabla_subdivision=[[(0, 0, 0), (1, 0, 0), (0, 1, 0)]])


def test_input_from_json_forms():
    a = input_from_json({"delta": "quartic", "nabla_subdivision": "quartic"})
    b = input_from_json({"delta": [list(v) for v in quartic_delta().vertices]})
    assert a.delta.vertices == b.delta.vertices
    assert len(a.boundary_subdivision()) == 64
    assert len(b.boundary_subdivision()) == 4


def test_check_subdivision():
    square = LatticePolytope([(0, 0), (2, 0), (0, 2), (2, 2)])
    halves = [LatticePolytope([(0, 0), (2, 0), (0, 2)]), LatticePolytope([(2, 0), (0, 2), (2, 2)])]
    check_subdivision(halves, square)
    with pytest.raises(GeometryError, match="gap"):
        check_subdivision(halves[:1], square)
    with pytest.raises(GeometryError, match="overlap"):
        check_subdivision(halves + [LatticePolytope([(0, 0), (2, 2), (0, 2)])], square)
    not_f2f = [LatticePolytope([(0, 0), (2, 0), (2, 2)]), LatticePolytope([(0, 0), (1, 1), (0, 2)]),
               LatticePolytope([(1, 1), (2, 2), (0, 2)])]
    with pytest.raises(GeometryError, match="face to face"):
        check_subdivision(not_f2f, square)

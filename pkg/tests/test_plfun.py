from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from tropmirror import linalg as la
from tropmirror.batyrev import phi_check, quintic_delta
from tropmirror.lattice import Fan, GeometryError, LatticePolytope, dual_polytope, minkowski_sum, normal_fan
from tropmirror.plfun import (
    PLFunction,
    dumps_plfunction,
    eval_pl,
    is_convex,
    is_strictly_convex,
    loads_plfunction,
    newton_polytope,
    quotient_fan,
    quotient_function,
)


def p2_fan():
    return Fan(2, [(1, 0), (0, 1), (-1, -1)], [{0, 1}, {1, 2}, {0, 2}])


def test_unit_ray_values_give_polar_dual():
    f = PLFunction.from_ray_values(p2_fan(), [1, 1, 1])
    assert is_convex(f) and is_strictly_convex(f)
    # (3,-2) = 5*(1,0) + 2*(-1,-1)
    assert f((3, -2)) == 7 and f((-1, -1)) == 1
    assert set(newton_polytope(f).vertices) == {(-1, -1), (2, -1), (-1, 2)}
    rays = LatticePolytope(p2_fan().rays)
    assert newton_polytope(f).vertices == dual_polytope(rays).vertices


def test_concave_function_is_rejected():
    f = PLFunction.from_ray_values(p2_fan(), [-1, -1, 0])
    assert not is_convex(f)
    with pytest.raises(GeometryError, match="non-convex"):
        newton_polytope(f)


def test_linear_function_is_convex_not_strictly():
    f = PLFunction.from_ray_values(p2_fan(), [2, -1, -1])
    assert is_convex(f) and not is_strictly_convex(f)
    assert all(k == 0 for k in f.kinks().values())
    assert newton_polytope(f).vertices == ((-2, 1),)


def test_convexity_needs_complete_fan():
    fan = Fan(2, [(1, 0), (0, 1)], [{0, 1}])
    with pytest.raises(GeometryError):
        is_convex(PLFunction.zero(fan))


def test_disagreeing_pieces_raise():
    fan = p2_fan()
    pieces = {m: (1, 0) for m in fan.maximal_cones}
    pieces[frozenset({1, 2})] = (0, 0)
    with pytest.raises(GeometryError, match="disagree"):
        PLFunction(fan, pieces)


def test_phi_check_on_quintic():
    phi = phi_check(quintic_delta())
    assert phi.integral and is_strictly_convex(phi)
    # value 1 on every ray, ray set = vertices of delta
    assert sorted(phi.fan.rays) == sorted(quintic_delta().vertices)
    assert phi.ray_values() == [1] * 5
    assert newton_polytope(phi).vertices == dual_polytope(quintic_delta()).vertices


def test_newton_minkowski_identity_quintic():
    phi = phi_check(quintic_delta())
    double = phi.scale(2)
    nabla = dual_polytope(quintic_delta())
    assert newton_polytope(double).vertices == minkowski_sum(newton_polytope(double - phi), nabla).vertices


def test_kinks_of_p2_fan():
    f = PLFunction.from_ray_values(p2_fan(), [1, 1, 1])
    assert sorted(f.kinks().values()) == [3, 3, 3]


@given(st.lists(st.integers(-4, 4), min_size=3, max_size=3),
       st.tuples(st.integers(-5, 5), st.integers(-5, 5)), st.integers(0, 6))
def test_eval_is_positively_homogeneous(values, x, t):
    f = PLFunction.from_ray_values(p2_fan(), values)
    assert eval_pl(f, la.vscale(t, x)) == t * eval_pl(f, x)


@given(st.lists(st.integers(-4, 4), min_size=3, max_size=3), st.lists(st.integers(-4, 4), min_size=3, max_size=3))
def test_newton_polytope_is_additive(a, b):
    fan = p2_fan()
    f = PLFunction.from_ray_values(fan, a)
    g = PLFunction.from_ray_values(fan, b)
    if not (is_convex(f) and is_convex(g)):
        return
    assert newton_polytope(f + g).vertices == minkowski_sum(newton_polytope(f), newton_polytope(g)).vertices


@given(st.lists(st.integers(-4, 4), min_size=3, max_size=3))
def test_convexity_matches_max_of_pieces(values):
    f = PLFunction.from_ray_values(p2_fan(), values)
    probes = [(x, y) for x in range(-3, 4) for y in range(-3, 4)]
    is_max = all(f(p) == max(la.dot(c, p) for c in f.linear_part.values()) for p in probes)
    assert is_convex(f) == is_max


def test_quotient_fan_of_ray_in_square_fan():
    fan = normal_fan(LatticePolytope([(0, 0), (1, 0), (0, 1), (1, 1)]))
    ray = frozenset({fan.rays.index((1, 0))})
    q = quotient_fan(fan, ray)
    assert q.rank == 1 and sorted(q.rays) == [(-1,), (1,)]
    assert q.is_complete


def test_quotient_function_of_phi_check_is_convex():
    phi = phi_check(quintic_delta())
    for cone in phi.fan.cones:
        if 0 < len(cone) < 4:
            qfan, qf = quotient_function(phi, cone)
            assert qfan.rank == 4 - len(cone)
            assert is_strictly_convex(qf)


def test_quotient_rejects_non_cone():
    with pytest.raises(GeometryError):
        quotient_fan(p2_fan(), {0, 1, 2})


def test_text_round_trip():
    f = PLFunction.from_ray_values(p2_fan(), [Fraction(1, 2), 1, 0])
    g = loads_plfunction(dumps_plfunction(f))
    assert g.fan.rays == f.fan.rays
    assert {k: la.vec(v) for k, v in g.linear_part.items()} == f.linear_part
    assert not g.integral

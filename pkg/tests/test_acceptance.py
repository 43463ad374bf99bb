"""The twelve acceptance criteria, each timed against its limit."""
import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np
import pytest

from tropmirror import batyrev, cli, legendre
from tropmirror.affine_complex import (
    UnknownVertexType,
    classify_vertex,
    cohomology_i_star_lambda,
    cycle_of_segments,
    discriminant_locus,
    euler_count,
)
from tropmirror.degen import fan_picture_strata, ghost_stalk
from tropmirror.lattice import dual_polytope, enumerate_reflexive_polygons, is_reflexive, minkowski_sum
from tropmirror.plfun import newton_polytope
from tropmirror.semiflat import (
    Box,
    hessian_duality_check,
    involution_error,
    monge_ampere_residual,
    quadratic,
    sum_of_exponentials,
)
from tropmirror.tropical import focus_focus_leg, tropical_line, validate

QUINTIC_NABLA = {(-1, -1, -1, -1), (-1, -1, -1, 4), (-1, -1, 4, -1), (-1, 4, -1, -1), (4, -1, -1, -1)}


@contextmanager
def within(seconds):
    start = time.perf_counter()
    yield
    elapsed = time.perf_counter() - start
    assert elapsed < seconds, f"took {elapsed:.2f}s, limit {seconds}s"


def quintic_b_extended():
    return batyrev.build_B(batyrev.quintic_input(triangulated=True), extend_across_facets=True)


@pytest.mark.criterion(1, "quintic duality", 1)
def test_quintic_duality(tmp_path, capsys):
    import json
    path = tmp_path / "delta.txt"
    path.write_text(batyrev.data_text("quintic_delta.txt"))
    with within(1):
        status = cli.main(["dualize", str(path)])
    report = json.loads(capsys.readouterr().out)
    assert status == 0
    assert {tuple(v) for v in report["vertices"]} == QUINTIC_NABLA and len(report["vertices"]) == 5


@pytest.mark.criterion(2, "reflexive involution on the 16 polygons", 5)
def test_reflexive_involution():
    with within(5):
        polygons = enumerate_reflexive_polygons(3)
        assert len(polygons) == 16
        for p in polygons:
            assert is_reflexive(p)
            assert dual_polytope(dual_polytope(p)).vertices == p.vertices


@pytest.mark.criterion(3, "Newton polytope / Minkowski identity", 5)
def test_newton_minkowski():
    with within(5):
        delta = batyrev.quintic_delta()
        phi = batyrev.phi_check(delta)
        h = phi.scale(2)
        nabla = dual_polytope(delta)
        assert newton_polytope(h).vertices == minkowski_sum(newton_polytope(h - phi), nabla).vertices


@pytest.mark.criterion(4, "discrete Legendre involution", 60)
def test_legendre_involution():
    with within(60):
        cx = batyrev.build_B(batyrev.quintic_input(triangulated=False))
        phi = legendre.cone_mpl(cx)
        dual = legendre.discrete_legendre(cx, phi)
        double = legendre.discrete_legendre(dual.complex, dual.function)
        ok, witness = legendre.complexes_isomorphic(cx, double.complex, phi, double.function)
    assert ok and witness is not None


@pytest.mark.criterion(5, "Batyrev duality", 60)
def test_batyrev_duality():
    with within(60):
        cx = batyrev.build_B(batyrev.quintic_input(triangulated=False))
        dual = legendre.discrete_legendre(cx, legendre.cone_mpl(cx))
        mirror = batyrev.build_B(batyrev.BatyrevInput(dual_polytope(batyrev.quintic_delta())))
        ok, witness = legendre.complexes_isomorphic(dual.complex, mirror, dual.function, legendre.cone_mpl(mirror))
    assert ok and witness is not None


@pytest.mark.criterion(6, "monodromy families of trivalent vertices", 120)
def test_monodromy_families():
    with within(120):
        cx = quintic_b_extended()
        kinds, unknown = {}, []
        for node in discriminant_locus(cx).trivalent_nodes():
            try:
                kinds[node] = classify_vertex(cx, node)
            except UnknownVertexType as exc:
                unknown.append(str(exc))
    assert not unknown
    assert kinds
    for node, kind in kinds.items():
        # positive vertices sit inside 2-faces, negative ones on edges
        assert kind == ("positive" if cx.face_dim(node) == 2 else "negative")


@pytest.mark.criterion(7, "Euler count 200 agrees with the Hodge oracle", 120)
def test_euler_characteristic():
    with within(120):
        count = euler_count(quintic_b_extended())
        h11, h12 = batyrev.hodge_oracle(batyrev.quintic_delta())
    assert count.positives - count.negatives == 200
    assert (h11, h12) == (101, 1)
    assert 2 * (h11 - h12) == count.chi


@pytest.mark.criterion(8, "I_n fibre: B is a circle of n segments", 60)
def test_i_n_fibre():
    with within(60):
        for n in (1, 2, 5):
            cx = cycle_of_segments(n)
            assert cx.dim == 1 and cx.is_closed and len(cx.cells) == n
            assert len(fan_picture_strata(cx).components()) == n


@pytest.mark.criterion(9, "ghost stalks", 60)
def test_ghost_stalks():
    with within(60):
        assert ghost_stalk([(1, 0), (0, 1)], [(0, 0)]).is_trivial
        quadrant = ghost_stalk([(1, 0), (0, 1)], [(1, 0), (0, 1)])
        assert quadrant.generators == [(0, 1), (1, 0)] and quadrant.relations == []
        square = [(0, 0, 1), (1, 0, 1), (0, 1, 1), (1, 1, 1)]
        stalk = ghost_stalk(square, square)
        # dual cone generated by x, y, z - x, z - y: x + (z - x) = y + (z - y)
        assert sorted(stalk.generators) == sorted([(1, 0, 0), (0, 1, 0), (-1, 0, 1), (0, -1, 1)])
        assert len(stalk.relations) == 1


@pytest.mark.criterion(10, "semiflat Legendre numerics", 10)
def test_semiflat_numerics():
    with within(10):
        k = sum_of_exponentials(2, Box((-0.125, -0.125), (0.125, 0.125)), 64)
        assert involution_error(k) <= 1e-6
        assert hessian_duality_check(k).hessian_deviation <= 1e-5
        q = quadratic(np.array([[2.0, 0.3], [0.3, 1.0]]), Box((-1.0, -1.0), (1.0, 1.0)), 64)
        assert monge_ampere_residual(q) <= 1e-8


@pytest.mark.criterion(11, "tropical balancing", 1)
def test_tropical_balancing():
    with within(1):
        line, cx = tropical_line()
        assert validate(line, cx).valid
        heavy, cx = tropical_line((2, 1, 1))
        report = validate(heavy, cx)
        assert not report.valid and report.verdict(0).total == (1, 0)
        leg, cx = focus_focus_leg(True)
        assert validate(leg, cx).valid
        leg, cx = focus_focus_leg(False)
        assert not validate(leg, cx).valid


@pytest.mark.criterion(12, "cohomology of i_* Lambda", 60)
def test_cohomology():
    with within(60):
        for n in (1, 2, 5):
            cx = cycle_of_segments(n)
            assert cohomology_i_star_lambda(cx, 0) == 1
            assert cohomology_i_star_lambda(cx, 1) == 1
        assert cohomology_i_star_lambda(quintic_b_extended(), 0) == 0

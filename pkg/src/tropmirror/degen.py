"""Combinatorics of toric degenerations attached to a polyhedral complex."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import linalg as la
from .affine_complex import AffineComplex, focus_focus_number, oriented_flag_monodromy
from .lattice import Cone, Fan, GeometryError, LatticePolytope, _extreme_rays, lattice_points
from .plfun import quotient_fan


# ---------------------------------------------------------------------------
# vertex fans


@dataclass
class VertexFan:
    fan: Fan
    cones: dict  # face id -> list of cones (ray index sets), one per corner occurrence
    corner_cones: dict  # corner (cell, k) -> maximal cone


def vertex_fan(cx: AffineComplex, vertex: int) -> VertexFan:
    """The fan structure at a vertex in its chart: one cone per cell through it."""
    rays: list[tuple] = []
    cones: dict = {}
    corner_cones = {}

    def ray_index(v):
        p = la.primitive(v)
        if p not in rays:
            rays.append(p)
        return rays.index(p)

    for c, k in cx.corners_at(vertex):
        cell = cx.cells[c]
        chart = cx.charts[(c, k)]
        poset = cell.face_poset
        edge_ray = {}
        for f in poset.of_dim(1):
            if k in f.vertices:
                (other,) = f.vertices - {k}
                edge_ray[other] = ray_index(la.matvec(chart, la.vsub(cell.vertices[other], cell.vertices[k])))
        for f in poset.faces:
            if f.dim < 0 or k not in f.vertices:
                continue
            cone = frozenset(edge_ray[j] for j in f.vertices if j in edge_ray)
            fid = cx.face_of[(c, f.vertices)]
            bucket = cones.setdefault(fid, [])
            if cone not in bucket:
                bucket.append(cone)
            if f.dim == cx.dim:
                corner_cones[(c, k)] = cone
    all_cones = [c for bucket in cones.values() for c in bucket]
    return VertexFan(Fan(cx.dim, rays, all_cones), cones, corner_cones)


# ---------------------------------------------------------------------------
# strata posets


@dataclass
class Stratum:
    face: int          # face id of the cell of P
    cell_dim: int
    dim: int           # dimension of the stratum
    data: object = None


@dataclass
class StrataPoset:
    picture: str                 # "fan" or "cone"
    strata: list[Stratum]
    order: list[tuple[int, int]]  # (i, j): stratum i lies in stratum j, covering relations
    boundary: bool = False       # the complex has boundary, so some fans are incomplete

    def components(self) -> list[Stratum]:
        top = max(s.dim for s in self.strata)
        return [s for s in self.strata if s.dim == top]

    def counts(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for s in self.strata:
            out[s.dim] = out.get(s.dim, 0) + 1
        return dict(sorted(out.items()))

    def to_json(self) -> dict:
        def block(s):
            d = s.data
            if isinstance(d, Fan):
                d = {"rank": d.rank, "rays": [list(r) for r in d.rays],
                     "cones": [sorted(c) for c in d.maximal_cones]}
            elif isinstance(d, LatticePolytope):
                d = {"vertices": [list(map(str, v)) for v in d.vertices]}
            return {"face": s.face, "cell_dim": s.cell_dim, "dim": s.dim, "data": d}

        return {"picture": self.picture, "boundary": self.boundary,
                "strata": [block(s) for s in self.strata], "order": [list(e) for e in self.order]}


def _cover_pairs(cx: AffineComplex, reverse: bool) -> list[tuple[int, int]]:
    out = []
    for big, smalls in cx.subfaces.items():
        for small in smalls:
            if cx.faces[big].dim == cx.faces[small].dim + 1:
                out.append((big, small) if reverse else (small, big))
    return sorted(out)


def fan_picture_strata(cx: AffineComplex) -> StrataPoset:
    """One stratum per cell, of dimension n - dim(cell), ordered by reverse
    inclusion, each carrying its quotient fan."""
    fans = {v: vertex_fan(cx, v) for v in cx.vertices}
    strata = []
    for f in cx.faces:
        vf = fans[_some_vertex(cx, f.id)]
        quotients = [quotient_fan(vf.fan, cone) for cone in vf.cones[f.id]]
        if len({_fan_shape(q) for q in quotients}) != 1:
            raise GeometryError(f"cell {f.id} has no well-defined transverse fan (decomposition is not toric)")
        strata.append(Stratum(f.id, f.dim, cx.dim - f.dim, quotients[0]))
    return StrataPoset("fan", strata, _cover_pairs(cx, reverse=True), boundary=not cx.is_closed)


def cone_picture_strata(cx: AffineComplex) -> StrataPoset:
    """One stratum per cell, of the cell's dimension, ordered by inclusion,
    each carrying the cell as its polytope."""
    strata = []
    for f in cx.faces:
        c, s = f.reps[0]
        cell = cx.cells[c]
        pts = [cell.vertices[i] for i in sorted(s)]
        strata.append(Stratum(f.id, f.dim, f.dim, LatticePolytope(pts, rank=cx.dim)))
    return StrataPoset("cone", strata, _cover_pairs(cx, reverse=False), boundary=not cx.is_closed)


def _some_vertex(cx: AffineComplex, fid: int) -> int:
    if cx.faces[fid].dim == 0:
        return fid
    return min(w for w in cx.subfaces[fid] if cx.faces[w].dim == 0)


def _fan_shape(fan: Fan) -> tuple:
    return fan.rank, tuple(sorted((fan.dim_of(c), len(c)) for c in fan.cones))


def dual_face_map(cx: AffineComplex, phi, dual) -> dict[int, int]:
    """Face id of ``cx`` -> face id of its discrete Legendre transform ``dual``
    (a ``legendre.LegendreDual`` built from ``phi``); inclusion reversing."""
    out = {}
    for f in cx.faces:
        v = _some_vertex(cx, f.id)
        vf = vertex_fan(cx, v)
        cone = vf.cones[f.id][0]
        cell = dual.cell_of_vertex[v]
        poly = dual.complex.cells[cell]
        idx = frozenset(poly.vertices.index(la.vscale(-1, phi.pieces[c]))
                        for c, top in vf.corner_cones.items() if cone <= top)
        out[f.id] = dual.complex.face_of[(cell, idx)]
    return out


# ---------------------------------------------------------------------------
# monoids


def hilbert_basis(generators: Sequence[Sequence], rank: int) -> list[tuple]:
    """Hilbert basis of the pointed full-dimensional cone generated by integer
    vectors, by enumeration in the box spanned by the generators."""
    gens = [la.primitive(g) for g in generators if any(g)]
    if not gens:
        return []
    if la.rank(gens) != rank:
        raise GeometryError("hilbert_basis needs a full-dimensional cone")
    facets = _extreme_rays(gens, rank)  # inequalities of the cone
    lo = [sum(min(0, g[i]) for g in gens) for i in range(rank)]
    hi = [sum(max(0, g[i]) for g in gens) for i in range(rank)]
    pts = []
    for x in itertools.product(*(range(a, b + 1) for a, b in zip(lo, hi))):
        if any(x) and all(la.dot(f, x) >= 0 for f in facets):
            pts.append(x)
    pts.sort(key=lambda x: sum(la.dot(f, x) for f in facets))
    basis = []
    for x in pts:
        if not any(all(la.dot(f, la.vsub(x, y)) >= 0 for f in facets) for y in basis):
            basis.append(x)
    return sorted(basis)


def _relations(gens: list[tuple], rank: int) -> list[tuple]:
    if not gens:
        return []
    return la.integer_kernel(la.transpose(gens), len(gens))


@dataclass
class GhostStalk:
    """``Hom(tau ∩ M, N)`` presented by generators in the dual of the span of tau."""

    rank: int
    generators: list[tuple]
    relations: list[tuple]  # integer relations among the generators
    cone: tuple             # extreme rays of the defining cone

    @property
    def is_trivial(self) -> bool:
        return self.rank == 0

    @property
    def is_free(self) -> bool:
        return len(self.generators) == self.rank

    def to_json(self) -> dict:
        return {"rank": self.rank, "generators": [list(g) for g in self.generators],
                "relations": [list(r) for r in self.relations], "cone": [list(r) for r in self.cone]}


def _as_generators(c) -> list[tuple]:
    if isinstance(c, Cone):
        return list(c.generators) + list(c.lineality) + [la.vscale(-1, l) for l in c.lineality]
    return [la.vec(v) for v in c]


def is_face(sigma: Sequence[Sequence], tau: Sequence[Sequence], rank: int) -> bool:
    """Whether cone(tau) is a face of the pointed cone cone(sigma)."""
    sig = [la.primitive(v) for v in sigma if any(v)]
    ta = [la.primitive(v) for v in tau if any(v)]
    if not ta:
        return True
    if not sig:
        return False
    span = la.saturated_span(sig, rank)
    cols = la.transpose(span)
    sc = [la.solve(cols, v) for v in sig]
    tc = [la.solve(cols, v) for v in ta]
    if any(x is None for x in tc):
        return False
    dual = _extreme_rays(sc, len(span))
    if any(la.dot(d, t) < 0 for d in dual for t in tc):
        return False
    tight = [d for d in dual if all(la.dot(d, t) == 0 for t in tc)]
    smallest_face = [s for s, c in zip(sig, sc) if all(la.dot(d, c) == 0 for d in tight)]
    tau_cone = Cone.spanned_by(ta, rank)
    return all(tau_cone.contains(s) for s in smallest_face)


def ghost_stalk(sigma, tau) -> GhostStalk:
    """Stalk of the ghost sheaf at a point of the orbit of the face tau of the
    cone sigma: the monoid of monoid maps from the lattice points of tau to N."""
    sig = _as_generators(sigma)
    ta = _as_generators(tau)
    rank = sigma.rank if isinstance(sigma, Cone) else len(sig[0])
    if not is_face(sig, ta, rank):
        raise GeometryError("tau is not a face of sigma")
    ta = [v for v in ta if any(v)]
    if not ta:
        return GhostStalk(0, [], [], ())
    span = la.saturated_span(ta, rank)
    d = len(span)
    cols = la.transpose(span)
    local = [la.solve(cols, v) for v in ta]
    dual_rays = _extreme_rays(local, d)
    gens = hilbert_basis(dual_rays, d)
    return GhostStalk(d, gens, _relations(gens, d), tuple(dual_rays))


@dataclass
class GradedMonoid:
    """Generators ``(m, degree)`` of the cone over a polytope up to a degree bound."""

    generators: list[tuple]
    relations: list[tuple]  # degree-2 witnesses ((a, b), (c, d)) with a + b = c + d

    def in_degree(self, k: int) -> list[tuple]:
        return [g for g in self.generators if g[-1] == k]


def cone_picture_monoid(sigma: LatticePolytope, degree_bound: int | None = None) -> GradedMonoid:
    """Minimal generators of ``C(sigma) ∩ (M + Z)``, graded by the last coordinate."""
    bound = degree_bound if degree_bound is not None else max(1, sigma.dim)
    layers = {k: [tuple(p) + (k,) for p in lattice_points(sigma.dilate(k))] for k in range(1, bound + 1)}
    gens = []
    for k in range(1, bound + 1):
        for x in layers[k]:
            if not _decomposes(x, gens, sigma):
                gens.append(x)
    deg1 = layers.get(1, [])
    sums: dict = {}
    for a, b in itertools.combinations_with_replacement(deg1, 2):
        sums.setdefault(la.vadd(a, b), []).append((a, b))
    rels = []
    for pairs in sums.values():
        for p, q in zip(pairs, pairs[1:]):
            rels.append((p, q))
    return GradedMonoid(sorted(gens, key=lambda g: (g[-1], g)), rels)


def _decomposes(x, gens, sigma) -> bool:
    for g in gens:
        rest = la.vsub(x, g)
        k = rest[-1]
        if k >= 1 and sigma.dilate(k).contains(rest[:-1]):
            return True
    return False


@dataclass
class Slice:
    """Closure of the shrunken polytope ``{m : <p, (m, 1)> > c}`` as inequalities
    ``<n, m> >= -offset`` together with its vertices (None when empty)."""

    c: Fraction
    normals: list[tuple]
    offsets: list[Fraction]
    polytope: LatticePolytope | None

    @property
    def is_empty(self) -> bool:
        return self.polytope is None or self.polytope.dim < len(self.normals[0] if self.normals else ())


def local_model_slice(sigma: LatticePolytope, c) -> Slice:
    c = Fraction(c)
    if not 0 < c < 1:
        raise GeometryError("c must lie strictly between 0 and 1")
    n = sigma.rank
    if sigma.dim < n:
        return Slice(c, [], [], None)
    cone_gens = [tuple(v) + (1,) for v in sigma.vertices]
    dual_rays = _extreme_rays(cone_gens, n + 1)
    monoid = hilbert_basis(dual_rays, n + 1)
    normals = [p[:-1] for p in monoid]
    offsets = [p[-1] - c for p in monoid]
    try:
        poly = LatticePolytope.from_inequalities(normals, offsets)
    except GeometryError:
        poly = None
    if poly is not None and (not poly.vertices or poly.dim < n):
        poly = None
    return Slice(c, normals, offsets, poly)


# ---------------------------------------------------------------------------
# positivity in dimension two


@dataclass
class PositivityReport:
    numbers: dict = field(default_factory=dict)  # wall face id -> n

    @property
    def positive(self) -> bool:
        return all(n > 0 for n in self.numbers.values())

    def to_json(self) -> dict:
        return {"points": {str(k): v for k, v in sorted(self.numbers.items())}, "positive": self.positive}


def positivity_2d(cx: AffineComplex) -> PositivityReport:
    """n at each focus-focus point, with the loop counterclockwise and the
    monodromy matrix acting on row vectors; points with trivial monodromy are
    not singular and are skipped."""
    if cx.dim != 2:
        raise GeometryError("positivity_2d needs a two-dimensional complex")
    report = PositivityReport()
    for flag in cx.gamma:
        mono = oriented_flag_monodromy(cx, flag)
        if mono == la.identity(2):
            continue
        report.numbers[flag.faces[-1]] = focus_focus_number(la.transpose(mono))
    return report

"""Affine manifolds with singularities on boundaries of reflexive polytopes."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Sequence

from . import linalg as la
from .affine_complex import AffineComplex, build_embedded_complex
from .lattice import (
    GeometryError,
    LatticePolytope,
    dual_polytope,
    interior_lattice_points,
    intersection,
    is_reflexive,
    lattice_points,
    normal_fan,
    volume,
)
from .plfun import PLFunction, is_convex, is_strictly_convex, loads_plfunction, newton_polytope


def phi_check(delta: LatticePolytope) -> PLFunction:
    """The PL function on the normal fan of the dual polytope with value 1 on
    every primitive ray generator (the vertices of delta)."""
    fan = normal_fan(dual_polytope(delta))
    return PLFunction.from_ray_values(fan, [1] * len(fan.rays))


def restrict_to_refinement(f: PLFunction, fan) -> PLFunction:
    """The same function presented on a refining fan."""
    pieces = {}
    for m in fan.maximal_cones:
        gens = [fan.rays[i] for i in m]
        interior = [sum(g[i] for g in gens) for i in range(fan.rank)]
        cones = f.fan.containing(interior)
        if not cones:
            raise GeometryError("fan does not refine the fan of the function")
        pieces[m] = f.linear_part[cones[0]]
    return PLFunction(fan, pieces)


@dataclass
class BatyrevInput:
    """Reflexive delta, a strictly convex h-check on a refinement of the normal
    fan of nabla (default: phi-check), an optional star subdivision of the
    boundary of nabla (maximal cells as ambient vertex lists) and an optional
    subdivision of the Newton polytope of h-check (full-dimensional cells)."""

    delta: LatticePolytope
    h_check: PLFunction | None = None
    nabla_subdivision: list | None = None
    decomposition: list | None = None
    nabla: LatticePolytope = field(init=False)

    def __post_init__(self):
        if not is_reflexive(self.delta):
            raise GeometryError("delta is not reflexive")
        self.nabla = dual_polytope(self.delta)
        phi = phi_check(self.delta)
        if self.h_check is None:
            self.h_check = phi
        if not is_strictly_convex(self.h_check):
            raise GeometryError("h-check is not strictly convex")
        self.h_prime = self.h_check - restrict_to_refinement(phi, self.h_check.fan)
        if not is_convex(self.h_prime):
            raise GeometryError("h-check minus phi-check is not convex")
        if self.nabla_subdivision is not None:
            self.nabla_subdivision = [_cell(c) for c in self.nabla_subdivision]
            for cell in self.nabla_subdivision:
                if not all(la.is_integral(p) and _on_boundary(self.nabla, p) for p in cell):
                    raise GeometryError("star subdivision must use integral boundary points of nabla")
        if self.decomposition is not None:
            self.decomposition = [_cell(c) for c in self.decomposition]

    @property
    def newton(self) -> LatticePolytope:
        return newton_polytope(self.h_check)

    @property
    def newton_prime(self) -> LatticePolytope:
        return newton_polytope(self.h_prime)

    def boundary_subdivision(self) -> list[list[tuple]]:
        """P of the boundary of nabla: the given star subdivision or the facets."""
        if self.nabla_subdivision is not None:
            return self.nabla_subdivision
        return [[self.nabla.vertices[i] for i in sorted(vs)] for vs in self.nabla.facet_vertex_sets]


def _cell(points) -> list[tuple]:
    return sorted(set(la.vec(p) for p in points))


def _on_boundary(poly: LatticePolytope, x) -> bool:
    """Relative boundary membership (a point has empty relative boundary)."""
    if poly.dim <= 0 or not poly.contains(x):
        return False
    return any(la.dot(nrm, x) + off == 0 for nrm, off in poly.facets)


def decompose_vertex(v, nabla: LatticePolytope, newton_prime: LatticePolytope, taus=()) -> tuple:
    """The unique v' integral in nabla with v - v' in the Newton polytope of h'
    (and in every face ``tau`` of it cut out by a cell through v)."""
    regions = [newton_prime] + [LatticePolytope(t, rank=nabla.rank) for t in taus]
    found = [p for p in lattice_points(nabla) if all(r.contains(la.vsub(v, p)) for r in regions)]
    if len(found) != 1:
        raise GeometryError(f"vertex {v}: {len(found)} decompositions v = v' + v''")
    return found[0]


def _facet_bases(poly: LatticePolytope) -> list[tuple]:
    out = []
    for vs in poly.facet_vertex_sets:
        pts = [poly.vertices[i] for i in sorted(vs)]
        out.append(la.saturated_span([la.vsub(p, pts[0]) for p in pts[1:]], poly.rank))
    return out


def boundary_cells(inp: BatyrevInput) -> list[list[tuple]]:
    """Maximal cells of the decomposition P of the boundary of the Newton polytope."""
    big = inp.newton
    if inp.decomposition is not None:
        if not is_good(inp.decomposition, inp):
            raise GeometryError("decomposition is not good")
        out = set()
        for cell in inp.decomposition:
            poly = LatticePolytope(cell)
            for vs in poly.facet_vertex_sets:
                pts = [poly.vertices[i] for i in sorted(vs)]
                if any(all(la.dot(n, p) + o == 0 for p in pts) for n, o in big.facets):
                    out.add(tuple(pts))
        return [list(c) for c in sorted(out)]
    if inp.nabla_subdivision is not None and inp.newton_prime.dim == 0:
        shift = inp.newton_prime.vertices[0]
        return [[la.vadd(p, shift) for p in c] for c in inp.nabla_subdivision]
    return [[big.vertices[i] for i in sorted(vs)] for vs in big.facet_vertex_sets]


def build_B(inp: BatyrevInput, *, extend_across_facets: bool = False) -> AffineComplex:
    """Boundary of the Newton polytope of h-check with projection charts."""
    big = inp.newton
    if big.dim - 1 < 1:
        raise GeometryError("dim B = 0: the boundary is a finite set of points")
    prime = inp.newton_prime
    cells = boundary_cells(inp)
    facet_bases = _facet_bases(big)
    bases = []
    for cell in cells:
        owner = next((basis for (nrm, off), basis in zip(big.facets, facet_bases)
                      if all(la.dot(nrm, p) + off == 0 for p in cell)), None)
        if owner is None:
            raise GeometryError("cell is not contained in a facet of the boundary")
        bases.append(owner)
    taus: dict = {}
    for cell in inp.decomposition or ():
        tau = [v for v in cell if _on_boundary(prime, v)] or [v for v in cell if prime.contains(v)]
        for v in cell:
            if tau and _on_boundary(big, v):
                taus.setdefault(v, []).append(tau)
    decomposition = {}

    def chart(vertex, basis):
        if vertex not in decomposition:
            decomposition[vertex] = decompose_vertex(vertex, inp.nabla, prime, taus.get(vertex, ()))
        proj, _ = la.quotient_projection(decomposition[vertex])
        return la.matmul(proj, la.transpose(basis))

    return build_embedded_complex(cells, chart_fn=chart, bases=bases, extend_across_facets=extend_across_facets)


# ---------------------------------------------------------------------------
# good decompositions


def check_subdivision(cells: Sequence[LatticePolytope], whole: LatticePolytope):
    """Raise unless the full-dimensional cells tile ``whole`` face to face."""
    for c in cells:
        if c.dim != whole.dim or c.rank != whole.rank:
            raise GeometryError("subdivision cell is not full-dimensional")
        if not all(whole.contains(v) for v in c.vertices):
            raise GeometryError("subdivision cell leaves the polytope")
    for i, a in enumerate(cells):
        for b in cells[i + 1:]:
            meet = intersection(a, b)
            if meet is None:
                continue
            if meet.dim == whole.dim:
                raise GeometryError("subdivision cells overlap")
            for c in (a, b):
                hit = frozenset(k for k, v in enumerate(c.vertices) if meet.contains(v))
                if set(c.vertices[k] for k in hit) != set(meet.vertices) or hit not in c.face_poset.index:
                    raise GeometryError("subdivision is not face to face")
    if sum(volume(c) for c in cells) != volume(whole):
        raise GeometryError("subdivision leaves a gap")


def _relative_volume(points: list, frame: tuple) -> Fraction:
    base, basis = frame
    cols = la.transpose(basis)
    local = [la.solve(cols, la.vsub(p, base)) for p in points]
    return volume(LatticePolytope(local, rank=len(basis)))


def is_good(cells: Sequence, inp: BatyrevInput) -> bool:
    """Whether a subdivision of the Newton polytope of h-check (maximal cells as
    vertex lists) is good with respect to the boundary subdivision of nabla."""
    big, prime = inp.newton, inp.newton_prime
    polys = [LatticePolytope(c, rank=big.rank) for c in cells]
    check_subdivision(polys, big)
    # (1) the Newton polytope of h' is a union of cells
    d = prime.dim
    inside = set()
    for poly in polys:
        for f in poly.face_poset.faces:
            pts = poly.face_poset.points(f)
            if f.dim == d and all(prime.contains(p) for p in pts):
                inside.add(tuple(pts))
    # a point summand only translates the boundary cells, so (1) is vacuous there
    if d > 0:
        p0 = prime.vertices[0]
        frame = (p0, la.saturated_span([la.vsub(p, p0) for p in prime.vertices[1:]], big.rank))
        if sum(_relative_volume(list(f), frame) for f in inside) != _relative_volume(list(prime.vertices), frame):
            return False
    # (2) vertices on the outer boundary or in the inner polytope
    for poly in polys:
        if not all(_on_boundary(big, v) or prime.contains(v) for v in poly.vertices):
            return False
    # (3) product form near the boundary
    reach = 1 + max(abs(la.dot(u, la.vsub(x, y))) for u in inp.delta.vertices
                    for x in big.vertices for y in big.vertices)
    stars = set()
    for cell in inp.boundary_subdivision():
        poly = LatticePolytope(cell)
        for f in poly.face_poset.faces:
            if f.dim >= 0:
                stars.add(tuple(poly.face_poset.points(f)))
    for poly in polys:
        if not any(_on_boundary(big, v) for v in poly.vertices):
            continue
        tau = [v for v in poly.vertices if _on_boundary(prime, v)]
        if not tau:
            continue
        if not any(_product_cell(tau, star, big, reach) == poly for star in stars):
            return False
    return True


def _product_cell(tau: list, star: tuple, big: LatticePolytope, reach) -> LatticePolytope | None:
    """``(C(star) + conv(tau)) ∩ big``, with the cone truncated at ``reach``."""
    pts = list(tau) + [la.vadd(t, la.vscale(reach, s)) for t in tau for s in star]
    return intersection(LatticePolytope(pts, rank=big.rank), big)


# ---------------------------------------------------------------------------
# Hodge numbers from lattice-point counts


def _interior_count(points_of_face: list, rank: int) -> int:
    if len(points_of_face) <= 1:
        return 0
    face = LatticePolytope(points_of_face, rank=rank)
    if face.dim <= 0:
        return 0
    return len(interior_lattice_points(face))


def _face_points(poly: LatticePolytope):
    """(dim, vertex index set, vertex list) for every nonempty proper face."""
    for f in poly.face_poset.faces:
        if 0 <= f.dim < poly.dim:
            yield f.dim, f.vertices, [poly.vertices[i] for i in sorted(f.vertices)]


def _dual_face(poly: LatticePolytope, dual: LatticePolytope, verts: list) -> list:
    """Vertices of the dual face {n in dual : <m, n> = -1 for all m in the face}."""
    return [n for n in dual.vertices if all(la.dot(m, n) == -1 for m in verts)]


def _h_formula(poly: LatticePolytope, dual: LatticePolytope) -> int:
    d = poly.rank
    total = len(lattice_points(poly)) - d - 1
    for dim, _, verts in _face_points(poly):
        if dim == d - 1:
            total -= _interior_count(verts, d)
        elif dim == d - 2:
            total += _interior_count(verts, d) * _interior_count(_dual_face(poly, dual, verts), d)
    return total


def hodge_oracle(delta: LatticePolytope) -> tuple[int, int]:
    """(h11, h12) of the Calabi-Yau hypersurface mirror family attached to delta:
    h11 counts on nabla = dual of delta, h12 the same formula on delta."""
    if not is_reflexive(delta):
        raise GeometryError("hodge_oracle needs a reflexive polytope")
    if delta.rank != 4:
        raise GeometryError("hodge_oracle is stated for rank 4")
    nabla = dual_polytope(delta)
    return _h_formula(nabla, delta), _h_formula(delta, nabla)


# ---------------------------------------------------------------------------
# bundled data


def quintic_delta() -> LatticePolytope:
    return LatticePolytope([(-1, -1, -1, -1), (1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)])


def quartic_delta() -> LatticePolytope:
    return LatticePolytope([(-1, -1, -1), (1, 0, 0), (0, 1, 0), (0, 0, 1)])


def load_triangulation(name: str) -> list[list[tuple]]:
    """Bundled boundary triangulations: 'quintic' (of the quintic nabla) or
    'quartic' (of the rank-3 analogue)."""
    text = resources.files("tropmirror.data").joinpath(f"{name}_triangulation.json").read_text()
    data = json.loads(text)
    return [[tuple(p) for p in cell] for cell in data["cells"]]


def quintic_input(triangulated: bool = True) -> BatyrevInput:
    return BatyrevInput(quintic_delta(), nabla_subdivision=load_triangulation("quintic") if triangulated else None)


def quartic_input(triangulated: bool = True) -> BatyrevInput:
    return BatyrevInput(quartic_delta(), nabla_subdivision=load_triangulation("quartic") if triangulated else None)


def data_text(name: str) -> str:
    """Contents of a bundled data file."""
    return resources.files("tropmirror.data").joinpath(name).read_text()


def reflexive_polygons() -> list[LatticePolytope]:
    """The 16 reflexive polygons up to GL(2, Z), as found by
    ``lattice.enumerate_reflexive_polygons(3)``."""
    data = json.loads(data_text("reflexive_polygons.json"))
    return [LatticePolytope([tuple(v) for v in p]) for p in data["polygons"]]


def input_from_json(data: dict) -> BatyrevInput:
    """``{"delta": [[...], ...] | "quintic" | "quartic", "h_check": null | {"multiple": k}
    | plfun text, "nabla_subdivision": null | "quintic" | "quartic" | [[...], ...],
    "decomposition": null | [[...], ...]}``."""
    named = {"quintic": quintic_delta, "quartic": quartic_delta}
    d = data["delta"]
    delta = named[d]() if isinstance(d, str) else LatticePolytope([tuple(v) for v in d])
    h = data.get("h_check")
    if isinstance(h, dict):
        h = phi_check(delta).scale(Fraction(h["multiple"]))
    elif isinstance(h, str):
        h = loads_plfunction(h)
    sub = data.get("nabla_subdivision")
    if isinstance(sub, str):
        sub = load_triangulation(sub)
    return BatyrevInput(delta, h, sub, data.get("decomposition"))

"""Integral affine manifolds with singularities as glued lattice-polytope complexes.

A complex is a list of full-dimensional lattice polytopes ("cells"), each in
its own integer coordinates, together with vertex correspondences between
pairs of codimension-one faces.  Every corner (cell, local vertex index) of a
cell carries a linear map from cell coordinates into the chart around that
vertex; together these define the fan structure at each vertex.

Parallel transport of a tangent vector from the chart of vertex ``v`` through
a cell ``s`` into the chart of vertex ``w`` is ``A[s, w] A[s, v]^-1``.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from . import linalg as la
from .lattice import GeometryError, LatticePolytope

SCHEMA_VERSION = 1

Corner = tuple  # (cell index, local vertex index)


class UnknownVertexType(GeometryError):
    pass


@dataclass(frozen=True)
class Gluing:
    """Identify a codimension-one face of ``cells[0]`` with one of ``cells[1]``.

    ``vertex_pairs`` lists (local vertex of cell a, local vertex of cell b).
    """

    cells: tuple
    vertex_pairs: tuple

    @property
    def mapping(self) -> dict:
        return dict(self.vertex_pairs)


@dataclass(frozen=True)
class FaceClass:
    id: int
    dim: int
    reps: tuple  # ((cell, frozenset of local vertex indices), ...)


@dataclass(frozen=True)
class GammaFlag:
    """Top-dimensional simplex of the discriminant: a flag of faces of
    dimensions 1 .. dim-1 whose last member is an interior wall."""

    faces: tuple  # face ids, increasing dimension
    cells: tuple  # (sigma1, sigma2), the cells on either side of the wall
    edge_corners: tuple  # ((a in sigma1, b in sigma1), (a in sigma2, b in sigma2))
    monodromy: tuple  # transport in the chart of vertex a: a -> sigma2 -> b -> sigma1 -> a


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


@dataclass(frozen=True)
class Loop:
    """Closed path through chart overlaps.

    ``steps[i] = (cell, k_in, k_out)``: enter the cell from the chart of its
    local vertex ``k_in`` and leave into the chart of local vertex ``k_out``.
    """

    steps: tuple

    def reversed(self) -> "Loop":
        return Loop(tuple((c, kout, kin) for c, kin, kout in reversed(self.steps)))

    def __add__(self, other: "Loop") -> "Loop":
        return Loop(self.steps + other.steps)


class AffineComplex:
    def __init__(
        self,
        cells: Sequence[LatticePolytope],
        gluings: Sequence[Gluing],
        charts: dict | None = None,
        allow_self_gluing: bool = False,
        extend_across_facets: bool = False,
        embeddings: Sequence | None = None,
    ):
        if not cells:
            raise GeometryError("a complex needs at least one cell")
        self.dim = cells[0].rank
        for c in cells:
            if c.rank != self.dim or not c.is_full_dimensional:
                raise GeometryError("cells must be full-dimensional in a common rank")
            if not c.is_lattice:
                raise GeometryError("cells must be lattice polytopes")
        if self.dim == 0:
            raise GeometryError("dim B = 0: nothing to glue")
        self.cells = list(cells)
        self.gluings = [Gluing(tuple(g.cells), tuple(sorted(tuple(p) for p in g.vertex_pairs))) for g in gluings]
        self.allow_self_gluing = allow_self_gluing
        self.extend_across_facets = extend_across_facets
        self.embeddings = list(embeddings) if embeddings is not None else None
        self._build_faces()
        self.charts = self._resolve_charts(charts or {})
        self._check_charts()
        self.gamma = self._discriminant()

    # ------------------------------------------------------------------ faces
    def _build_faces(self):
        uf = _UnionFind()
        local_faces = {}
        per_cell = []
        for c, cell in enumerate(self.cells):
            mine = [(f.vertices, f.dim) for f in cell.face_poset.faces if f.dim >= 0]
            per_cell.append(mine)
            for s, d in mine:
                local_faces[(c, s)] = d
                uf.find((c, tuple(sorted(s))))
        self.wall_gluing = {}
        for gi, g in enumerate(self.gluings):
            a, b = g.cells
            if not (0 <= a < len(self.cells) and 0 <= b < len(self.cells)):
                raise GeometryError(f"gluing {gi} refers to a missing cell")
            if a == b and not self.allow_self_gluing:
                raise GeometryError(f"gluing {gi} glues cell {a} to itself (self-gluing excluded)")
            m = g.mapping
            if len(m) != len(g.vertex_pairs) or len(set(m.values())) != len(m):
                raise GeometryError(f"gluing {gi} is not a bijection of vertices")
            fa, fb = frozenset(m), frozenset(m.values())
            if local_faces.get((a, fa)) != self.dim - 1 or local_faces.get((b, fb)) != self.dim - 1:
                raise GeometryError(f"gluing {gi} does not match codimension-one faces")
            _check_integral_gluing(self.cells[a], self.cells[b], m, gi)
            for s, d in per_cell[a]:
                if s <= fa:
                    img = frozenset(m[i] for i in s)
                    if local_faces.get((b, img)) != d:
                        raise GeometryError(f"gluing {gi} does not respect the face structure")
                    uf.union((a, tuple(sorted(s))), (b, tuple(sorted(img))))
        classes: dict = {}
        for (c, s), d in local_faces.items():
            root = uf.find((c, tuple(sorted(s))))
            classes.setdefault(root, []).append((d, (c, s)))
        ordered = sorted(classes.values(), key=lambda reps: (reps[0][0], min((c, sorted(s)) for _, (c, s) in reps)))
        self.faces: list[FaceClass] = []
        self.face_of = {}
        for fid, reps in enumerate(ordered):
            reps = sorted(((c, s) for _, (c, s) in reps), key=lambda r: (r[0], sorted(r[1])))
            self.faces.append(FaceClass(fid, local_faces[reps[0]], tuple(reps)))
            for r in reps:
                self.face_of[r] = fid
        self.vertices = [f.id for f in self.faces if f.dim == 0]
        self.corner_vertex = {}
        for c, cell in enumerate(self.cells):
            for k in range(len(cell.vertices)):
                self.corner_vertex[(c, k)] = self.face_of[(c, frozenset([k]))]
        self.maximal = {c: self.face_of[(c, frozenset(range(len(cell.vertices))))] for c, cell in enumerate(self.cells)}
        # walls: codimension-one classes
        self.walls = {}
        self.boundary = []
        for f in self.faces:
            if f.dim != self.dim - 1:
                continue
            if len(f.reps) > 2:
                raise GeometryError(f"face {f.id} lies in {len(f.reps)} cells: not a manifold")
            if len(f.reps) == 1:
                self.boundary.append(f.id)
        for g in self.gluings:
            a, b = g.cells
            m = g.mapping
            fid = self.face_of[(a, frozenset(m))]
            if fid in self.walls:
                raise GeometryError(f"face {fid} glued twice")
            self.walls[fid] = (a, b, m)
        # containment between classes
        self.subfaces = {f.id: set() for f in self.faces}
        for (c, s), fid in self.face_of.items():
            for t, _ in per_cell[c]:
                if t < s:
                    self.subfaces[fid].add(self.face_of[(c, t)])

    @property
    def is_closed(self) -> bool:
        return not self.boundary

    def face_dim(self, fid: int) -> int:
        return self.faces[fid].dim

    def cells_containing(self, fid: int) -> list[int]:
        return [c for c, top in self.maximal.items() if fid == top or fid in self.subfaces[top]]

    def corners_at(self, vertex: int) -> list[Corner]:
        return sorted(k for k, v in self.corner_vertex.items() if v == vertex)

    def euler_characteristic(self) -> int:
        return sum((-1) ** f.dim for f in self.faces)

    def f_vector(self) -> tuple:
        return tuple(sum(1 for f in self.faces if f.dim == d) for d in range(self.dim + 1))

    # ----------------------------------------------------------------- charts
    def _resolve_charts(self, charts: dict) -> dict:
        out = {}
        for corner, a in charts.items():
            corner = tuple(corner)
            if corner not in self.corner_vertex:
                raise GeometryError(f"chart given for unknown corner {corner}")
            out[corner] = la.mat(a)
        if self.dim == 1:
            for v in self.vertices:
                corners = self.corners_at(v)
                for i, (c, k) in enumerate(corners):
                    if (c, k) in out:
                        continue
                    if i == 0:
                        out[(c, k)] = ((1,),)
                        continue
                    c0, k0 = corners[0]
                    s0 = _outward_sign(self.cells[c0], k0) * out[(c0, k0)][0][0]
                    s1 = _outward_sign(self.cells[c], k)
                    out[(c, k)] = ((-s0 * s1,),)
        for corner in self.corner_vertex:
            out.setdefault(corner, la.identity(self.dim))
        for corner, a in out.items():
            if len(a) != self.dim or not la.is_unimodular(a):
                raise GeometryError(f"chart at corner {corner} is not in GL({self.dim}, Z)")
        return out

    def _check_charts(self):
        for fid, (a, b, m) in self.walls.items():
            ca, cb = self.cells[a], self.cells[b]
            face = sorted(m)
            outside_a = next(i for i in range(len(ca.vertices)) if i not in m)
            outside_b = next(i for i in range(len(cb.vertices)) if i not in set(m.values()))
            for k in face:
                A = self.charts[(a, k)]
                Bm = self.charts[(b, m[k])]
                imgs = []
                for j in face:
                    if j == k:
                        continue
                    da = la.matvec(A, la.vsub(ca.vertices[j], ca.vertices[k]))
                    db = la.matvec(Bm, la.vsub(cb.vertices[m[j]], cb.vertices[m[k]]))
                    if da != db:
                        raise GeometryError(f"vertex chart at corner {(a, k)} disagrees with {(b, m[k])} on face {fid}")
                    imgs.append(da)
                normal = _normal_of(imgs, self.dim)
                pa = la.dot(normal, la.matvec(A, la.vsub(ca.vertices[outside_a], ca.vertices[k])))
                pb = la.dot(normal, la.matvec(Bm, la.vsub(cb.vertices[outside_b], cb.vertices[m[k]])))
                if pa * pb >= 0:
                    raise GeometryError(f"cells {a} and {b} overlap in the chart at face {fid}")

    def transition(self, cell: int, k_from: int, k_to: int) -> tuple:
        """Vertex chart of ``k_from`` -> vertex chart of ``k_to`` through ``cell``."""
        return la.matmul(self.charts[(cell, k_to)], la.inverse(self.charts[(cell, k_from)]))

    # ------------------------------------------------------------ discriminant
    def _raw_flags(self) -> list[GammaFlag]:
        n = self.dim
        flags = []
        if n < 2:
            return flags
        for fid, (a, b, m) in sorted(self.walls.items()):
            rho_a = frozenset(m)
            chains = _local_chains(self.cells[a], rho_a, n)
            for chain in chains:
                edge = chain[0]
                ka, kb = sorted(edge)
                ids = tuple(self.face_of[(a, s)] for s in chain[:-1]) + (fid,)
                mono = _flag_monodromy(self, a, b, (ka, kb), (m[ka], m[kb]))
                flags.append(GammaFlag(ids, (a, b), ((ka, kb), (m[ka], m[kb])), mono))
        return flags

    def _discriminant(self) -> list[GammaFlag]:
        flags = self._raw_flags()
        if self.extend_across_facets:
            ident = la.identity(self.dim)
            flags = [f for f in flags if f.monodromy != ident]
        return flags

    # ----------------------------------------------------------------- export
    def to_json(self) -> dict:
        cells = []
        for i, c in enumerate(self.cells):
            block = {"vertices": [list(map(int, v)) for v in c.vertices]}
            if self.embeddings is not None:
                base, basis = self.embeddings[i]
                block["embedding"] = {"base": list(map(int, base)), "basis": [list(map(int, r)) for r in basis]}
            cells.append(block)
        gluings = [{"cells": list(g.cells), "vertex_pairs": [list(p) for p in g.vertex_pairs]} for g in self.gluings]
        charts = [
            {"cell": c, "vertex": k, "linear": [list(map(int, r)) for r in a]}
            for (c, k), a in sorted(self.charts.items())
        ]
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "affine_complex",
            "dim": self.dim,
            "cells": cells,
            "gluings": gluings,
            "charts": charts,
            "options": {
                "extend_across_facets": self.extend_across_facets,
                "allow_self_gluing": self.allow_self_gluing,
            },
        }


# ---------------------------------------------------------------------------
# helpers


def _outward_sign(cell: LatticePolytope, k: int) -> int:
    """dim 1: +1 if the cell extends in the positive direction from vertex k."""
    other = cell.vertices[1 - k]
    return 1 if other[0] > cell.vertices[k][0] else -1


def _normal_of(vectors: list, n: int) -> tuple:
    if not vectors:
        return (1,) if n == 1 else None
    ker = la.integer_kernel(vectors, n)
    if len(ker) != 1:
        raise GeometryError("degenerate wall in a vertex chart")
    return ker[0]


def _check_integral_gluing(ca: LatticePolytope, cb: LatticePolytope, m: dict, gi: int):
    face = sorted(m)
    p0 = ca.vertices[face[0]]
    q0 = cb.vertices[m[face[0]]]
    da = [la.vsub(ca.vertices[i], p0) for i in face[1:]]
    db = [la.vsub(cb.vertices[m[i]], q0) for i in face[1:]]
    n = ca.rank
    ea = la.saturated_span(da, n)
    eb = la.saturated_span(db, n)
    if len(ea) != len(eb):
        raise GeometryError(f"gluing {gi}: faces have different dimensions")
    if not ea:
        return
    ta = la.transpose(ea)
    tb = la.transpose(eb)
    alpha = [la.solve(ta, d) for d in da]
    beta = [la.solve(tb, d) for d in db]
    # find M with M alpha_i = beta_i
    rows = []
    for r in range(len(ea)):
        sol = la.solve(alpha, [b[r] for b in beta])
        if sol is None:
            raise GeometryError(f"gluing {gi} is not affine")
        rows.append(sol)
    if any(la.matvec(rows, a) != b for a, b in zip(alpha, beta)):
        raise GeometryError(f"gluing {gi} is not affine")
    if not la.is_unimodular(rows):
        raise GeometryError(f"gluing {gi} is not integral-affine (non-integral gluing)")


def _local_chains(cell: LatticePolytope, rho: frozenset, n: int) -> list[tuple]:
    """Chains T1 < ... < T_{n-2} < rho of local faces with dim T_i = i."""
    by_dim = {}
    for f in cell.face_poset.faces:
        if f.vertices <= rho and 1 <= f.dim <= n - 2:
            by_dim.setdefault(f.dim, []).append(f.vertices)
    chains = [()]
    for d in range(1, n - 1):
        chains = [ch + (s,) for ch in chains for s in by_dim.get(d, []) if not ch or ch[-1] < s]
    return [ch + (rho,) for ch in chains]


def _flag_monodromy(cx: AffineComplex, s1: int, s2: int, e1: tuple, e2: tuple) -> tuple:
    """Transport in the chart of vertex a around a -> s2 -> b -> s1 -> a."""
    (a1, b1), (a2, b2) = e1, e2
    return la.matmul(cx.transition(s1, b1, a1), cx.transition(s2, a2, b2))


# ---------------------------------------------------------------------------
# construction


def build_complex(
    cells: Sequence,
    gluings: Sequence,
    charts: dict | None = None,
    *,
    allow_self_gluing: bool = False,
    extend_across_facets: bool = False,
    embeddings: Sequence | None = None,
) -> AffineComplex:
    polys = [c if isinstance(c, LatticePolytope) else LatticePolytope(c) for c in cells]
    gl = [g if isinstance(g, Gluing) else _gluing_from_spec(polys, g) for g in gluings]
    return AffineComplex(polys, gl, charts, allow_self_gluing, extend_across_facets, embeddings)


def _gluing_from_spec(polys: list, spec) -> Gluing:
    if isinstance(spec, dict):
        a, b = spec["cells"]
        if "vertex_pairs" in spec:
            return Gluing((a, b), tuple(tuple(p) for p in spec["vertex_pairs"]))
        lin = la.mat(spec["linear"])
        if not la.is_unimodular(lin):
            raise GeometryError("non-integral gluing map")
        t = la.vec(spec.get("translation", [0] * len(lin)))
        fa, fb = spec["faces"]
        pa, pb = polys[a], polys[b]
        va = pa.facet_vertex_sets[fa]
        vb = pb.facet_vertex_sets[fb]
        pairs = []
        for i in sorted(va):
            img = la.vadd(la.matvec(lin, pa.vertices[i]), t)
            j = next((j for j in vb if pb.vertices[j] == img), None)
            if j is None:
                raise GeometryError("gluing map does not send the face onto the target face")
            pairs.append((i, j))
        return Gluing((a, b), tuple(pairs))
    a, b, pairs = spec
    return Gluing((a, b), tuple(tuple(p) for p in pairs))


def build_embedded_complex(
    ambient_cells: Sequence[Sequence[Sequence[int]]],
    chart_fn=None,
    bases: Sequence | None = None,
    **options,
) -> AffineComplex:
    """Complex from cells given by their vertices in a common ambient lattice.

    Faces with equal ambient vertex sets are glued.  ``chart_fn(vertex, basis)``
    returns the linear part of the vertex chart restricted to a cell with the
    given intrinsic basis (columns); without it, all vertex charts default.
    """
    cells, embeddings = [], []
    for i, pts in enumerate(ambient_cells):
        pts = sorted(set(tuple(p) for p in pts))
        n = len(pts[0])
        base = pts[0]
        if bases is not None:
            basis = [tuple(r) for r in bases[i]]
        else:
            basis = la.saturated_span([la.vsub(p, base) for p in pts[1:]], n)
        cols = la.transpose(basis)
        local = []
        for p in pts:
            x = la.solve(cols, la.vsub(p, base))
            if x is None or not la.is_integral(x):
                raise GeometryError(f"cell {i} is not a lattice polytope in its affine span")
            local.append(x)
        cells.append(LatticePolytope(local))
        embeddings.append((base, basis))
    # glue facets with the same ambient vertex set
    def ambient(c, k):
        base, basis = embeddings[c]
        return la.vadd(base, la.matvec(la.transpose(basis), cells[c].vertices[k]))

    by_key = {}
    for c, cell in enumerate(cells):
        for vs in cell.facet_vertex_sets:
            key = frozenset(ambient(c, k) for k in vs)
            by_key.setdefault(key, []).append((c, vs))
    gluings = []
    for key, owners in sorted(by_key.items(), key=lambda kv: min(x for x, _ in kv[1])):
        if len(owners) > 2:
            raise GeometryError("face shared by more than two cells: not a manifold")
        if len(owners) == 2:
            (a, va), (b, vb) = owners
            pairs = []
            for i in sorted(va):
                p = ambient(a, i)
                j = next(j for j in vb if ambient(b, j) == p)
                pairs.append((i, j))
            gluings.append(Gluing((a, b), tuple(pairs)))
    charts = None
    if chart_fn is not None:
        charts = {}
        for c, cell in enumerate(cells):
            for k in range(len(cell.vertices)):
                charts[(c, k)] = chart_fn(ambient(c, k), embeddings[c][1])
    return AffineComplex(cells, gluings, charts, embeddings=embeddings, **options)


def cycle_of_segments(n: int, *, extend_across_facets: bool = False) -> AffineComplex:
    """n unit segments glued end to end: the circle R/nZ."""
    if n < 1:
        raise GeometryError("need at least one segment")
    cells = [LatticePolytope([(0,), (1,)]) for _ in range(n)]
    gluings = [Gluing((i, (i + 1) % n), ((1, 0),)) for i in range(n)]
    return AffineComplex(cells, gluings, allow_self_gluing=(n == 1), extend_across_facets=extend_across_facets)


def focus_focus_pair(n: int) -> AffineComplex:
    """Two unit triangles sharing the edge [(0,0),(1,0)], with the chart of the
    lower triangle at (1,0) sheared so that the shared edge carries a single
    focus-focus point with number n (n = 0 gives a flat complex)."""
    upper = LatticePolytope([(0, 0), (1, 0), (0, 1)])
    lower = LatticePolytope([(0, 0), (1, 0), (0, -1)])
    pairs = tuple((upper.vertices.index(p), lower.vertices.index(p)) for p in [(0, 0), (1, 0)])
    charts = {(1, lower.vertices.index((1, 0))): ((1, -n), (0, 1))}
    return AffineComplex([upper, lower], [Gluing((0, 1), pairs)], charts)


def loads_complex(text: str) -> AffineComplex:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"complex file is not JSON: {exc}") from None
    return complex_from_json(data)


def complex_from_json(data: dict) -> AffineComplex:
    if data.get("kind", "affine_complex") != "affine_complex":
        raise ValueError("not an affine complex file")
    cells = [LatticePolytope([tuple(v) for v in c["vertices"]]) for c in data["cells"]]
    embeddings = None
    if data["cells"] and all("embedding" in c for c in data["cells"]):
        embeddings = [(tuple(c["embedding"]["base"]), [tuple(r) for r in c["embedding"]["basis"]]) for c in data["cells"]]
    gluings = [_gluing_from_spec(cells, g) for g in data.get("gluings", [])]
    charts = {(c["cell"], c["vertex"]): c["linear"] for c in data.get("charts", [])}
    opts = data.get("options", {})
    return AffineComplex(
        cells,
        gluings,
        charts,
        allow_self_gluing=bool(opts.get("allow_self_gluing", False)),
        extend_across_facets=bool(opts.get("extend_across_facets", False)),
        embeddings=embeddings,
    )


def dumps_complex(cx: AffineComplex) -> str:
    return json.dumps(cx.to_json(), indent=1, sort_keys=True)


def with_options(cx: AffineComplex, **options) -> AffineComplex:
    opts = {"allow_self_gluing": cx.allow_self_gluing, "extend_across_facets": cx.extend_across_facets}
    opts.update(options)
    return AffineComplex(cx.cells, cx.gluings, cx.charts, embeddings=cx.embeddings, **opts)


# ---------------------------------------------------------------------------
# loops and parallel transport


def loop_from_sequence(cx: AffineComplex, sequence: Sequence[int]) -> Loop:
    """Loop from an alternating list ``[v0, cell0, v1, cell1, ...]`` of vertex ids
    and cell indices; the path returns to ``v0`` after the last cell."""
    if len(sequence) % 2 or not sequence:
        raise GeometryError("loop needs alternating vertex/cell entries")
    verts = list(sequence[0::2])
    cells = list(sequence[1::2])
    steps = []
    for i, c in enumerate(cells):
        v_in, v_out = verts[i], verts[(i + 1) % len(verts)]
        steps.append((c, _unique_corner(cx, c, v_in), _unique_corner(cx, c, v_out)))
    return Loop(tuple(steps))


def _unique_corner(cx: AffineComplex, cell: int, vertex: int) -> int:
    if not 0 <= cell < len(cx.cells):
        raise GeometryError(f"loop refers to a missing cell {cell}")
    ks = [k for k in range(len(cx.cells[cell].vertices)) if cx.corner_vertex[(cell, k)] == vertex]
    if not ks:
        raise GeometryError(f"vertex {vertex} is not a vertex of cell {cell}")
    if len(ks) > 1:
        raise GeometryError(f"vertex {vertex} occurs twice in cell {cell}; give corners explicitly")
    return ks[0]


def check_loop(cx: AffineComplex, loop: Loop):
    if not loop.steps:
        raise GeometryError("empty loop")
    for i, (c, kin, kout) in enumerate(loop.steps):
        if (c, kin) not in cx.corner_vertex or (c, kout) not in cx.corner_vertex:
            raise GeometryError(f"loop step {i} uses a corner outside cell {c}")
        nc, nkin, _ = loop.steps[(i + 1) % len(loop.steps)]
        if cx.corner_vertex[(c, kout)] != cx.corner_vertex[(nc, nkin)]:
            raise GeometryError(f"loop breaks between steps {i} and {i + 1}")


def parallel_transport(cx: AffineComplex, loop: Loop) -> tuple:
    """Linear part of the composed transitions around the loop, in the chart of
    the starting vertex."""
    check_loop(cx, loop)
    total = la.identity(cx.dim)
    for c, kin, kout in loop.steps:
        total = la.matmul(cx.transition(c, kin, kout), total)
    if cx.corner_vertex[(loop.steps[-1][0], loop.steps[-1][2])] != cx.corner_vertex[(loop.steps[0][0], loop.steps[0][1])]:
        raise GeometryError("loop is not closed")
    # the last and first corner may differ (same vertex, different cells): pass through W_v
    return total


def flag_loop(flag: GammaFlag) -> Loop:
    (a1, b1), (a2, b2) = flag.edge_corners
    s1, s2 = flag.cells
    return Loop(((s2, a2, b2), (s1, b1, a1)))


# ---------------------------------------------------------------------------
# discriminant locus


@dataclass(frozen=True)
class Discriminant:
    flags: tuple
    nodes: dict  # face id -> number of Gamma flags through its barycenter

    @property
    def empty(self) -> bool:
        return not self.flags

    def trivalent_nodes(self) -> list[int]:
        return sorted(f for f, k in self.nodes.items() if k == 3)

    def simplices(self) -> list[tuple]:
        """All barycentric simplices of Gamma as chains of face ids."""
        out = set()
        for fl in self.flags:
            for r in range(1, len(fl.faces) + 1):
                out.update(itertools.combinations(fl.faces, r))
        return sorted(out, key=lambda s: (len(s), s))


def discriminant_locus(cx: AffineComplex) -> Discriminant:
    nodes: dict = {}
    for fl in cx.gamma:
        for fid in fl.faces:
            nodes[fid] = nodes.get(fid, 0) + 1
    return Discriminant(tuple(cx.gamma), nodes)


def extend_across_facets(cx: AffineComplex) -> AffineComplex:
    return with_options(cx, extend_across_facets=True)


# ---------------------------------------------------------------------------
# monodromy around Gamma vertices (dim 3)


def node_monodromy(cx: AffineComplex, node: int) -> list[tuple]:
    """Local monodromy matrices at a node of Gamma, consistently oriented so
    that their ordered product is the identity."""
    d = cx.faces[node].dim
    flags = [f for f in cx.gamma if node in f.faces]
    if cx.dim != 3 or d not in (1, 2):
        raise GeometryError("vertex classification needs dim 3 and a node on an edge or 2-face")
    if d == 2:
        return _triangle_node(cx, node, flags)
    return _edge_node(cx, node, flags)


def _triangle_node(cx, node, flags):
    a, b, m = cx.walls[node]
    rho = sorted(m)
    if len(rho) != 3:
        raise UnknownVertexType(f"node at face {node}: wall is not a triangle")
    # G_v: coordinates of cell a -> coordinates of cell b through the chart of v
    def g(k):
        return la.matmul(la.inverse(cx.charts[(b, m[k])]), cx.charts[(a, k)])

    gs = {k: g(k) for k in rho}
    out = []
    for p, q in ((rho[0], rho[1]), (rho[1], rho[2]), (rho[2], rho[0])):
        mat = la.matmul(la.inverse(gs[q]), gs[p])
        if mat != la.identity(3):
            out.append(mat)
    return out


def _edge_node(cx, node, flags):
    rep_cell, rep = cx.faces[node].reps[0]
    walls_at = [w for w in cx.walls if node in cx.subfaces[w]]
    if not walls_at:
        return []
    # cyclic order of walls around the edge
    cells_of_wall = {w: (cx.walls[w][0], cx.walls[w][1]) for w in walls_at}
    order = [walls_at[0]]
    cell_seq = []
    cur_cell = cells_of_wall[walls_at[0]][1]
    while True:
        wall = order[-1]
        nxt = [w for w in walls_at if w != wall and cur_cell in cells_of_wall[w]]
        if len(nxt) != 1:
            raise UnknownVertexType(f"node at face {node}: link of the edge is not a circle")
        w = nxt[0]
        cell_seq.append(cur_cell)
        if w == order[0]:
            break
        order.append(w)
        s1, s2 = cells_of_wall[w]
        cur_cell = s2 if s1 == cur_cell else s1
    # transport W_a -> W_b through each cell of the cycle
    vertex_a, vertex_b = sorted(f for f in cx.subfaces[node] if cx.faces[f].dim == 0)

    def y(cell):
        ka = _unique_corner(cx, cell, vertex_a)
        kb = _unique_corner(cx, cell, vertex_b)
        return cx.transition(cell, ka, kb)

    ys = [y(c) for c in cell_seq]
    k = len(ys)
    mats = []
    for j in range(k):
        prev = ys[j - 1]
        mat = la.matmul(la.inverse(prev), ys[j])
        if mat != la.identity(3):
            mats.append(mat)
    return mats


def classify_monodromy(mats: Sequence) -> str:
    """'positive' if the matrices are simultaneously conjugate to the family
    I + w_i f (common invariant plane), 'negative' for I + u f_i (common
    invariant line); anything else raises UnknownVertexType."""
    if len(mats) != 3:
        raise UnknownVertexType(f"unknown vertex type: {len(mats)} nontrivial local monodromies")
    n = len(mats[0])
    ident = la.identity(n)
    logs = []
    for t in mats:
        d = tuple(tuple(x - y for x, y in zip(r1, r2)) for r1, r2 in zip(t, ident))
        if la.rank(d) != 1 or la.matmul(d, d) != tuple((0,) * n for _ in range(n)):
            raise UnknownVertexType("unknown vertex type: monodromy is not a transvection")
        logs.append(d)
    cols, rows = [], []
    for d in logs:
        r = next(row for row in d if any(row))
        f = la.primitive(r)
        c = next(col for col in la.transpose(d) if any(col))
        u = la.primitive(c)
        cols.append(u)
        rows.append(f)
    total = tuple(tuple(sum(d[i][j] for d in logs) for j in range(n)) for i in range(n))
    if any(any(r) for r in total):
        raise UnknownVertexType("unknown vertex type: local monodromy logarithms do not sum to zero")
    same_row = all(la.rank([rows[0], f]) == 1 for f in rows)
    same_col = all(la.rank([cols[0], u]) == 1 for u in cols)
    if same_row and not same_col:
        f = rows[0]
        ws = [_factor(d, f, by_row=True) for d in logs]
        if la.gcd_of_minors([ws[0], ws[1]], 2) == 1:
            return "positive"
    if same_col and not same_row:
        u = cols[0]
        fs = [_factor(d, u, by_row=False) for d in logs]
        if la.gcd_of_minors([fs[0], fs[1]], 2) == 1:
            return "negative"
    raise UnknownVertexType("unknown vertex type: monodromy matches neither family")


def _factor(d, vec, by_row: bool) -> tuple:
    """d = w (x) f: given the primitive f (by_row) return integer w, else given u return f."""
    n = len(d)
    if by_row:
        j = next(i for i, x in enumerate(vec) if x)
        return tuple(la._norm(d[i][j] / Fraction(vec[j])) for i in range(n))
    i = next(i for i, x in enumerate(vec) if x)
    return tuple(la._norm(d[i][j] / Fraction(vec[i])) for j in range(n))


def classify_vertex(cx: AffineComplex, node: int) -> str:
    return classify_monodromy(node_monodromy(cx, node))


@dataclass(frozen=True)
class EulerCount:
    positives: int
    negatives: int

    @property
    def chi(self) -> int:
        return self.positives - self.negatives


def euler_count(cx: AffineComplex) -> EulerCount:
    if cx.gamma and cx.dim != 3:
        raise GeometryError("euler_count needs dim 3")
    pos = neg = 0
    for node in discriminant_locus(cx).trivalent_nodes():
        kind = classify_vertex(cx, node)
        if kind == "positive":
            pos += 1
        else:
            neg += 1
    return EulerCount(pos, neg)


# ---------------------------------------------------------------------------
# dim 2: focus-focus points


def focus_focus_number(mono: tuple) -> int:
    """n with mono conjugate to (1 n; 0 1), for a loop oriented counterclockwise."""
    d = ((mono[0][0] - 1, mono[0][1]), (mono[1][0], mono[1][1] - 1))
    if mono == la.identity(2):
        return 0
    if la.det(mono) != 1 or la.matmul(d, d) != ((0, 0), (0, 0)):
        raise GeometryError("monodromy is not unipotent")
    ker = la.integer_kernel(d, 2)
    u = ker[0]
    w = la.transpose(la.unimodular_with_first_column(u))[1]
    if la.det([u, w]) != 1:
        w = la.vscale(-1, w)
    return la.det([la.matvec(d, w), w])


def oriented_flag_monodromy(cx: AffineComplex, flag: GammaFlag) -> tuple:
    """dim 2: monodromy of the counterclockwise loop around the wall midpoint,
    in the chart of the starting vertex."""
    (a1, b1), (a2, b2) = flag.edge_corners
    s1, s2 = flag.cells
    cell = cx.cells[s1]
    chart = cx.charts[(s1, a1)]
    along = la.matvec(chart, la.vsub(cell.vertices[b1], cell.vertices[a1]))
    centre = [sum(v[i] for v in cell.vertices) for i in range(2)]
    centre = la.vsub(la.vscale(Fraction(1, len(cell.vertices)), centre), cell.vertices[a1])
    side = la.matvec(chart, centre)
    if along[0] * side[1] - along[1] * side[0] > 0:
        return flag.monodromy
    # sigma1 lies to the right: go around the other way, starting from b
    return la.matmul(cx.transition(s2, b2, a2), cx.transition(s1, a1, b1))


# ---------------------------------------------------------------------------
# cohomology of i_* Lambda with rational coefficients


def _invariants(mats: Iterable, n: int) -> list[tuple]:
    rows = []
    for t in mats:
        for i in range(n):
            rows.append(tuple(t[i][j] - (1 if i == j else 0) for j in range(n)))
    rows = [r for r in rows if any(r)]
    if not rows:
        return [tuple(1 if i == j else 0 for j in range(n)) for i in range(n)]
    return la.nullspace(rows, n)


def global_invariants(cx: AffineComplex) -> list[tuple]:
    """Flat global sections of Lambda (x) Q over B minus Gamma, in the
    coordinates of cell 0."""
    n = cx.dim
    # bipartite nerve: nodes ('v', vertex) and ('c', cell); edges are corners
    frame = {("c", 0): la.identity(n)}  # maps cell-0 coordinates into the node's chart
    adj: dict = {}
    for (c, k), v in cx.corner_vertex.items():
        adj.setdefault(("c", c), []).append((("v", v), (c, k)))
        adj.setdefault(("v", v), []).append((("c", c), (c, k)))
    queue = [("c", 0)]
    cycles = []
    seen_edges = set()
    while queue:
        node = queue.pop()
        for other, corner in adj[node]:
            if corner in seen_edges:
                continue
            seen_edges.add(corner)
            chart = cx.charts[corner]
            step = chart if node[0] == "c" else la.inverse(chart)
            cand = la.matmul(step, frame[node])
            if other not in frame:
                frame[other] = cand
                queue.append(other)
            else:
                # loop monodromy in cell-0 coordinates
                cycles.append(la.matmul(la.inverse(frame[other]), cand))
    if len(frame) != len(adj):
        raise GeometryError("complex is not connected")
    return _invariants(cycles, n)


def cohomology_i_star_lambda(cx: AffineComplex, p: int) -> int:
    if p == 0:
        return len(global_invariants(cx))
    if p == 1:
        return _barycentric_cohomology(cx)[1]
    raise ValueError("only p = 0 and p = 1 are supported")


def _barycentric_cohomology(cx: AffineComplex) -> tuple[int, int]:
    """Cech cohomology on the cover by open stars of barycenters.

    This is simplicial cohomology of the barycentric subdivision with
    coefficients in the sections of i_* Lambda (x) Q over open stars of its
    simplices.  Sections over a star are the vectors invariant under every
    loop in the star that avoids Gamma.  A region (cell, corner, chain) is the
    part of the star inside one cell near one vertex.
    """
    n = cx.dim
    uf = _UnionFind()
    chains_of_cell = []
    for c, cell in enumerate(cx.cells):
        fs = [f.vertices for f in cell.face_poset.faces if f.dim >= 0]
        chains = _all_chains(fs)
        chains_of_cell.append(chains)
        for ch in chains:
            uf.find((c, ch))
    for g in cx.gluings:
        a, b = g.cells
        m = g.mapping
        for ch in chains_of_cell[a]:
            if ch[-1] <= frozenset(m):
                uf.union((a, ch), (b, tuple(frozenset(m[i] for i in f) for f in ch)))
    classes: dict = {}
    for c, chains in enumerate(chains_of_cell):
        for ch in chains:
            classes.setdefault(uf.find((c, ch)), []).append((c, ch))

    def with_vertex(c, k, ch):
        return uf.find((c, tuple(dict.fromkeys((frozenset([k]),) + ch))))

    frames = {}
    sections = {}
    for root, reps in classes.items():
        regs = [(c, k, ch) for c, ch in reps for k in sorted(ch[0])]
        by_rep: dict = {}
        by_vertex: dict = {}
        for r in regs:
            by_rep.setdefault((r[0], r[2]), []).append(r)
            by_vertex.setdefault(with_vertex(*r), []).append(r)
        frame = {regs[0]: la.identity(n)}
        cycles = []
        queue = [regs[0]]
        while queue:
            r = queue.pop()
            here = frame[r]
            moves = [(nb, here) for nb in by_rep[(r[0], r[2])]]
            moves += [
                (nb, la.matmul(la.inverse(cx.charts[nb[:2]]), la.matmul(cx.charts[r[:2]], here)))
                for nb in by_vertex[with_vertex(*r)]
            ]
            for nb, cand in moves:
                if nb not in frame:
                    frame[nb] = cand
                    queue.append(nb)
                elif frame[nb] != cand:
                    cycles.append(la.matmul(la.inverse(frame[nb]), cand))
        frames[root] = frame
        sections[root] = _invariants(cycles, n)

    by_len: dict = {}
    for r in sorted(classes, key=lambda r: (len(r[1]), r[0], [sorted(f) for f in r[1]])):
        by_len.setdefault(len(r[1]), []).append(r)

    def coboundary(k):
        src = by_len.get(k + 1, [])
        col_off, off = {}, 0
        for r in src:
            col_off[r] = off
            off += len(sections[r])
        rows = []
        for c, ch in by_len.get(k + 2, []):
            kk = min(ch[0])
            block = [[0] * off for _ in range(n)]
            for i in range(len(ch)):
                face = ch[:i] + ch[i + 1:]
                froot = uf.find((c, face))
                transport = frames[froot][(c, kk, face)]
                sign = -1 if i % 2 else 1
                for j, vec in enumerate(sections[froot]):
                    img = la.matvec(transport, vec)
                    for t in range(n):
                        block[t][col_off[froot] + j] += sign * img[t]
            rows.extend(block)
        return rows, off

    d0, c0 = coboundary(0)
    d1, c1 = coboundary(1)
    r0 = la.rank(d0) if d0 and c0 else 0
    r1 = la.rank(d1) if d1 and c1 else 0
    return c0 - r0, c1 - r1 - r0


def _all_chains(faces: list) -> list[tuple]:
    """All nonempty chains (strictly increasing) of the given faces."""
    faces = sorted(faces, key=lambda s: (len(s), sorted(s)))
    out = []

    def grow(ch):
        out.append(ch)
        for f in faces:
            if ch[-1] < f:
                grow(ch + (f,))

    for f in faces:
        grow((f,))
    return out

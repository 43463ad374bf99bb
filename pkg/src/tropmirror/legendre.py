"""Multi-valued piecewise linear functions and the discrete Legendre transform."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from . import linalg as la
from .affine_complex import AffineComplex, Gluing
from .lattice import GeometryError, LatticePolytope


class MPLFunction:
    """A multi-valued PL function on a complex.

    ``pieces[(cell, k)]`` is the covector of the local representative at the
    vertex of corner ``(cell, k)`` on that cell, written in the chart of the
    vertex.  Representatives at different vertices are only defined up to a
    linear function, so two MPL functions are compared through their kinks.
    """

    def __init__(self, cx: AffineComplex, pieces: Mapping):
        self.complex = cx
        self.pieces = {tuple(k): la.vec(v) for k, v in pieces.items()}
        missing = [c for c in cx.corner_vertex if c not in self.pieces]
        if missing:
            raise GeometryError(f"no representative at corners {missing[:3]}")
        self._kinks = self._compute_kinks()

    @classmethod
    def from_kinks(cls, cx: AffineComplex, kinks: Mapping[int, object]) -> "MPLFunction":
        """Representatives with prescribed kinks on the interior walls, each
        vertex normalised to vanish on its first corner."""
        pieces = {}
        for v in cx.vertices:
            first = cx.corners_at(v)[0]
            pieces[first] = (0,) * cx.dim
            todo = [first]
            while todo:
                here = todo.pop()
                for fid, there, normal in _across_walls(cx, *here):
                    want = la.vadd(pieces[here], la.vscale(kinks.get(fid, 0), normal))
                    if there not in pieces:
                        pieces[there] = want
                        todo.append(there)
                    elif pieces[there] != want:
                        raise GeometryError(f"kinks around vertex {v} do not close up")
        return cls(cx, pieces)

    def _compute_kinks(self) -> dict:
        cx = self.complex
        out = {}
        for fid, (a, b, m) in cx.walls.items():
            values = set()
            for k in m:
                normal = _wall_normal(cx, a, k, b, m[k], m)
                diff = la.vsub(self.pieces[(b, m[k])], self.pieces[(a, k)])
                values.add(_multiple(diff, normal))
            if len(values) != 1:
                raise GeometryError(f"representatives disagree on the kink along wall {fid}")
            out[fid] = values.pop()
        return out

    @property
    def kinks(self) -> dict:
        return dict(self._kinks)

    @property
    def is_strictly_convex(self) -> bool:
        return all(k > 0 for k in self._kinks.values())

    @property
    def is_integral(self) -> bool:
        return all(la.is_integral(p) for p in self.pieces.values())

    def local_newton_polytope(self, vertex: int) -> LatticePolytope:
        """Newton polytope of the representative at a vertex, in dual chart coordinates."""
        return LatticePolytope([la.vscale(-1, self.pieces[c]) for c in self.complex.corners_at(vertex)],
                               rank=self.complex.dim)


def _inverse(m: dict) -> dict:
    return {v: k for k, v in m.items()}


def _across_walls(cx: AffineComplex, c: int, k: int):
    """(wall, neighbouring corner, normal into the neighbour) for the walls of
    cell c through its vertex k."""
    for fid, (a, b, m) in cx.walls.items():
        inv = _inverse(m)
        if a == c and k in m:
            yield fid, (b, m[k]), _wall_normal(cx, a, k, b, m[k], m)
        if b == c and k in inv:
            yield fid, (a, inv[k]), _wall_normal(cx, b, k, a, inv[k], inv)


def _wall_normal(cx, a, k, b, kb, m) -> tuple:
    """Primitive covector in the chart at corner (a, k) vanishing on the wall,
    positive on cell b."""
    chart = cx.charts[(a, k)]
    cell = cx.cells[a]
    dirs = [la.matvec(chart, la.vsub(cell.vertices[j], cell.vertices[k])) for j in m if j != k]
    ker = la.integer_kernel(dirs, cx.dim) if dirs else [la.identity(cx.dim)[0]]
    if len(ker) != 1:
        raise GeometryError("wall is not of codimension one")
    normal = la.primitive(ker[0])
    other = cx.cells[b]
    inside = set(m.values())
    j = next(i for i in range(len(other.vertices)) if i not in inside)
    probe = la.matvec(cx.charts[(b, kb)], la.vsub(other.vertices[j], other.vertices[kb]))
    return normal if la.dot(normal, probe) > 0 else la.vscale(-1, normal)


def _multiple(v, base):
    idx = next(i for i, x in enumerate(base) if x != 0)
    c = Fraction(v[idx]) / base[idx]
    if la.vscale(c, base) != la.vec(v):
        raise GeometryError("representatives differ by more than a kink along a wall")
    return la._norm(c)


def cone_mpl(cx: AffineComplex, height=None) -> MPLFunction:
    """The function linear on the cone over each cell with value ``height(p)``
    at each ambient vertex p (default 1), for a complex embedded on the
    boundary of a polytope around the origin with vertex charts projecting
    along the vertex (``build_B`` with the default h-check)."""
    if cx.embeddings is None:
        raise GeometryError("cone_mpl needs an embedded complex")
    cover = {}
    for c, cell in enumerate(cx.cells):
        base, basis = cx.embeddings[c]
        pts = [la.vadd(base, la.matvec(la.transpose(basis), x)) for x in cell.vertices]
        cov = la.solve(pts, [1 if height is None else height(p) for p in pts])
        if cov is None:
            raise GeometryError(f"heights on cell {c} are not linear on its cone")
        cover[c] = (pts, cov)
    pieces = {}
    for v in cx.vertices:
        corners = cx.corners_at(v)
        c0, k0 = corners[0]
        point = cover[c0][0][k0]
        proj, sect = la.quotient_projection(point)
        ref = cover[c0][1]
        for c, k in corners:
            basis = cx.embeddings[c][1]
            if la.matmul(proj, la.transpose(basis)) != cx.charts[(c, k)]:
                raise GeometryError("vertex chart is not the projection along the vertex")
            diff = la.vsub(cover[c][1], ref)
            pieces[(c, k)] = tuple(la.dot(diff, col) for col in la.transpose(sect))
    return MPLFunction(cx, pieces)


def alcoved_height(offset: int = 1000):
    """Height on the boundary points of the simplex dual to conv{-1, e_i}: with
    x_0 = 0 and partial sums x_k = (p_1 + 1) + ... + (p_k + 1), the offset plus
    the sum of (x_j - x_i)^2 over i < j.  Strictly convex on the bundled
    alcoved triangulations, so ``cone_mpl`` with it has positive kinks."""

    def height(p):
        xs = [0]
        for c in p:
            xs.append(xs[-1] + c + 1)
        return offset + sum((xs[j] - xs[i]) ** 2 for j in range(len(xs)) for i in range(j))

    return height


# ---------------------------------------------------------------------------
# the transform


@dataclass
class LegendreDual:
    complex: AffineComplex
    function: MPLFunction
    cell_of_vertex: dict    # vertex of the input -> cell of the dual
    vertex_of_cell: dict    # maximal cell of the input -> vertex face id of the dual


def discrete_legendre(cx: AffineComplex, phi: MPLFunction) -> LegendreDual:
    """Glue the Newton polytopes of the local representatives of ``phi``."""
    if not phi.is_strictly_convex:
        raise GeometryError("discrete Legendre transform needs a strictly convex function")
    if not cx.is_closed:
        raise GeometryError("the polyhedral decomposition is not toric at the boundary (incomplete vertex fans)")
    cells, index_of_corner, cell_of_vertex = [], {}, {}
    for v in cx.vertices:
        poly = phi.local_newton_polytope(v)
        corners = cx.corners_at(v)
        if len(poly.vertices) != len(corners):
            raise GeometryError(f"vertex {v}: Newton polytope vertices do not match the maximal cells")
        cell_of_vertex[v] = len(cells)
        for c in corners:
            index_of_corner[c] = (len(cells), poly.vertices.index(la.vscale(-1, phi.pieces[c])))
        cells.append(poly)
    gluings = []
    for f in cx.faces:
        if f.dim != 1:
            continue
        oriented = _orient_edge(cx, f)
        v_cell = w_cell = None
        pairs = []
        for c, kv, kw in oriented:
            iv, av = index_of_corner[(c, kv)]
            iw, aw = index_of_corner[(c, kw)]
            v_cell, w_cell = iv, iw
            pairs.append((av, aw))
        gluings.append(Gluing((v_cell, w_cell), tuple(sorted(set(pairs)))))
    charts, pieces = {}, {}
    for (c, k), (ci, vi) in index_of_corner.items():
        charts[(ci, vi)] = la.transpose(cx.charts[(c, k)])
        pieces[(ci, vi)] = la.vscale(-1, cx.cells[c].vertices[k])
    dual = AffineComplex(cells, gluings, charts, allow_self_gluing=True,
                         extend_across_facets=cx.extend_across_facets)
    vertex_of_cell = {}
    for c in range(len(cx.cells)):
        ci, vi = index_of_corner[(c, 0)]
        vertex_of_cell[c] = dual.corner_vertex[(ci, vi)]
    return LegendreDual(dual, MPLFunction(dual, pieces), cell_of_vertex, vertex_of_cell)


def _orient_edge(cx: AffineComplex, f) -> list[tuple]:
    """Representatives (cell, k_start, k_end) of an edge class with a
    consistent direction, propagated through the wall gluings."""
    c0, s0 = f.reps[0]
    k1, k2 = sorted(s0)
    seen = {(c0, k1, k2)}
    todo = [(c0, k1, k2)]
    while todo:
        c, a, b = todo.pop()
        for fid, (x, y, m) in cx.walls.items():
            for src, dst, mm in ((x, y, m), (y, x, _inverse(m))):
                if src == c and a in mm and b in mm:
                    nxt = (dst, mm[a], mm[b])
                    if (dst, mm[b], mm[a]) in seen and nxt not in seen:
                        raise GeometryError("edge orientation is inconsistent")
                    if nxt not in seen:
                        seen.add(nxt)
                        todo.append(nxt)
    return sorted(seen)


# ---------------------------------------------------------------------------
# isomorphism search


@dataclass
class Isomorphism:
    cells: dict        # cell of A -> cell of B
    vertex_maps: dict  # cell of A -> tuple of image vertex indices
    linear: dict       # vertex face id of A -> chart change matrix


def _affine_from(points_a, points_b):
    """Affine map x -> L x + t with L integral and unimodular sending the
    first n+1 points (affinely independent) to the second; None otherwise."""
    n = len(points_a[0])
    da = [la.vsub(p, points_a[0]) for p in points_a[1:]]
    db = [la.vsub(p, points_b[0]) for p in points_b[1:]]
    if la.rank(da) < n:
        return None
    lin = la.matmul(la.transpose(db), la.inverse(la.transpose(da)))
    if not la.is_integral([x for row in lin for x in row]) or la.det(lin) not in (1, -1):
        return None
    shift = la.vsub(points_b[0], la.matvec(lin, points_a[0]))
    return la.mat(lin), shift


def _affine_frame(poly: LatticePolytope) -> list[int]:
    frame = [0]
    for i in range(1, len(poly.vertices)):
        trial = frame + [i]
        pts = [poly.vertices[j] for j in trial]
        if la.rank([la.vsub(p, pts[0]) for p in pts[1:]]) == len(trial) - 1:
            frame = trial
        if len(frame) == poly.rank + 1:
            break
    return frame


def _vertex_map(pa: LatticePolytope, pb: LatticePolytope, lin, shift):
    image = []
    for v in pa.vertices:
        w = la.vadd(la.matvec(lin, v), shift)
        if w not in pb.vertices:
            return None
        image.append(pb.vertices.index(w))
    return tuple(image) if len(set(image)) == len(image) == len(pb.vertices) else None


def _cell_isos(pa: LatticePolytope, pb: LatticePolytope, fixed: dict | None = None):
    """All integral affine isomorphisms pa -> pb as vertex maps, optionally
    constrained to extend a partial vertex map."""
    if len(pa.vertices) != len(pb.vertices):
        return
    frame = _affine_frame(pa)
    fixed = fixed or {}
    pts_a = [pa.vertices[i] for i in frame]
    choices = [[fixed[i]] if i in fixed else range(len(pb.vertices)) for i in frame]
    for pick in itertools.product(*choices):
        if len(set(pick)) != len(pick):
            continue
        res = _affine_from(pts_a, [pb.vertices[j] for j in pick])
        if res is None:
            continue
        vm = _vertex_map(pa, pb, *res)
        if vm is not None and all(vm[i] == j for i, j in fixed.items()):
            yield vm, res[0]


def _signature(cx: AffineComplex, kinks: dict | None):
    from .lattice import volume

    vols = sorted(volume(c) for c in cx.cells)
    ks = sorted(kinks.values()) if kinks is not None else None
    return cx.f_vector(), vols, ks


def complexes_isomorphic(a: AffineComplex, b: AffineComplex, phi_a: MPLFunction | None = None,
                         phi_b: MPLFunction | None = None) -> tuple[bool, Isomorphism | None]:
    """Search for an integral affine isomorphism of complexes (cells, gluings
    and vertex charts), matching kinks when functions are given."""
    ka = phi_a.kinks if phi_a is not None else None
    kb = phi_b.kinks if phi_b is not None else None
    if (ka is None) != (kb is None):
        raise GeometryError("give a function on both complexes or on neither")
    if a.dim != b.dim or len(a.cells) != len(b.cells):
        return False, None
    if _signature(a, ka) != _signature(b, kb):
        return False, None
    glue_b = _glue_index(b)
    glue_a = _glue_index(a)
    for target in range(len(b.cells)):
        for vm, _ in _cell_isos(a.cells[0], b.cells[target]):
            res = _propagate(a, b, glue_a, glue_b, {0: (target, vm)})
            if res is None:
                continue
            witness = _verify(a, b, res, ka, kb)
            if witness is not None:
                return True, witness
    return False, None


def _glue_index(cx: AffineComplex) -> dict:
    """(cell, facet vertex set) -> (other cell, vertex mapping)."""
    out = {}
    for fid, (x, y, m) in cx.walls.items():
        out[(x, frozenset(m))] = (y, m)
        out[(y, frozenset(m.values()))] = (x, _inverse(m))
    return out


def _propagate(a, b, glue_a, glue_b, start):
    assigned = dict(start)
    used = {t for t, _ in start.values()}
    todo = list(start)
    while todo:
        c = todo.pop()
        tc, vm = assigned[c]
        for (x, face), (y, m) in glue_a.items():
            if x != c:
                continue
            img_face = frozenset(vm[i] for i in face)
            hit = glue_b.get((tc, img_face))
            if hit is None:
                return None
            ty, mb = hit
            fixed = {m[i]: mb[vm[i]] for i in face}
            if y in assigned:
                oy, ovm = assigned[y]
                if oy != ty or any(ovm[k] != v for k, v in fixed.items()):
                    return None
                continue
            if ty in used and not (y == c and ty == tc):
                return None
            found = next(_cell_isos(a.cells[y], b.cells[ty], fixed), None)
            if found is None:
                return None
            assigned[y] = (ty, found[0])
            used.add(ty)
            todo.append(y)
    if len(assigned) != len(a.cells):
        return None
    return assigned


def _verify(a, b, assigned, ka, kb):
    linear = {}
    for (c, k), v in a.corner_vertex.items():
        tc, vm = assigned[c]
        pa, pb = a.cells[c], b.cells[tc]
        # linear part of the cell map from an affine frame
        frame = _affine_frame(pa)
        lin, _ = _affine_from([pa.vertices[i] for i in frame], [pb.vertices[vm[i]] for i in frame])
        change = la.matmul(la.matmul(b.charts[(tc, vm[k])], lin), la.inverse(a.charts[(c, k)]))
        if v in linear and linear[v] != change:
            return None
        linear[v] = change
    if ka is not None:
        for fid, (x, y, m) in a.walls.items():
            tx, vm = assigned[x]
            img = b.face_of[(tx, frozenset(vm[i] for i in m))]
            if kb.get(img) != ka[fid]:
                return None
    return Isomorphism({c: t for c, (t, _) in assigned.items()},
                       {c: vm for c, (_, vm) in assigned.items()}, linear)

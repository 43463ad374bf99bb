"""Parametrized tropical curves on integral affine complexes and their balancing."""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from . import linalg as la
from .affine_complex import AffineComplex, _unique_corner, focus_focus_pair, node_monodromy
from .lattice import GeometryError, LatticePolytope


@dataclass(frozen=True)
class GammaRef:
    """A point of the discriminant: a Gamma flag (by index into ``cx.gamma``,
    located at the barycenter of its wall) or a node (by face id)."""

    kind: str   # "flag" or "node"
    index: int


@dataclass
class TropicalVertex:
    id: int
    cell: int                 # cell whose coordinates locate the vertex
    coords: tuple | None = None
    gamma: GammaRef | None = None
    end: bool = False         # univalent end on the boundary of B: not balanced


@dataclass
class TropicalEdge:
    start: int
    end: int
    weight: int
    direction: tuple          # primitive, pointing from start to end
    frame: int | None = None  # vertex of B whose chart expresses ``direction``; None = cell coordinates
    via: int | None = None    # vertex of B whose chart carries the segment


@dataclass
class TropicalGraph:
    vertices: list[TropicalVertex]
    edges: list[TropicalEdge]

    def vertex(self, vid: int) -> TropicalVertex:
        for v in self.vertices:
            if v.id == vid:
                return v
        raise GeometryError(f"unknown tropical vertex {vid}")

    @property
    def legs(self) -> list[TropicalEdge]:
        gam = {v.id for v in self.vertices if v.gamma is not None}
        return [e for e in self.edges if e.start in gam or e.end in gam]

    def is_connected(self) -> bool:
        if not self.vertices:
            return False
        adj = {v.id: set() for v in self.vertices}
        for e in self.edges:
            adj[e.start].add(e.end)
            adj[e.end].add(e.start)
        seen = {self.vertices[0].id}
        todo = deque(seen)
        while todo:
            for w in adj[todo.popleft()] - seen:
                seen.add(w)
                todo.append(w)
        return len(seen) == len(adj)


# ---------------------------------------------------------------------------
# monodromy-invariant lattices at points of Gamma


@dataclass
class InvariantLattices:
    """Sublattices of the tangent lattice of ``base_cell`` near a Gamma point."""

    base_cell: int
    generators: list[tuple]       # local monodromy in base cell coordinates
    invariant: list[tuple]        # (i_* Lambda): vectors fixed by all generators
    dual_invariant: list[tuple]   # (i_* Lambda-check): covectors fixed by all generators
    perp: list[tuple]             # annihilator of dual_invariant
    balancing_group: list[tuple]  # perp ∩ invariant

    def contains(self, basis: list[tuple], v) -> bool:
        return _in_saturated(basis, v, len(v))

    def to_json(self) -> dict:
        out = {k: [list(map(_num, r)) for r in getattr(self, k)]
               for k in ("invariant", "dual_invariant", "perp", "balancing_group")}
        out["generators"] = [[list(map(_num, r)) for r in m] for m in self.generators]
        out["base_cell"] = self.base_cell
        return out


def _num(x):
    x = Fraction(x)
    return int(x) if x.denominator == 1 else str(x)


def _fixed(mats: list[tuple], n: int) -> list[tuple]:
    rows = [la.vsub(r, e) for m in mats for r, e in zip(m, la.identity(n))]
    rows = [r for r in rows if any(r)]
    return la.integer_kernel(rows, n) if rows else list(la.identity(n))


def _in_saturated(basis: list[tuple], v, n: int) -> bool:
    if not any(v):
        return True
    if not basis:
        return False
    return la.rank(list(basis) + [la.vec(v)]) == la.rank(basis) and la.is_integral(v)


def _same_span(a: list[tuple], b: list[tuple], n: int) -> bool:
    return la.rank(a) == la.rank(b) and all(_in_saturated(a, v, n) for v in b)


def _lattices(mats: list[tuple], n: int) -> tuple:
    inv = _fixed(mats, n)
    dual = _fixed([la.transpose(m) for m in mats], n)
    perp = la.integer_kernel(dual, n) if dual else list(la.identity(n))
    constraints = [la.vsub(r, e) for m in mats for r, e in zip(m, la.identity(n))] + list(dual)
    constraints = [r for r in constraints if any(r)]
    group = la.integer_kernel(constraints, n) if constraints else list(la.identity(n))
    return inv, dual, perp, group


def _conj(p, m):
    return la.matmul(la.inverse(p), la.matmul(m, p))


def _routes(cx: AffineComplex, point: GammaRef, base_cell: int) -> list[list[tuple]]:
    """Local monodromy generators in base cell coordinates, computed along two
    different paths from the native chart of the Gamma point."""
    inv = la.inverse
    if point.kind == "flag":
        fl = cx.gamma[point.index]
        (a1, b1), (a2, b2) = fl.edge_corners
        s1, s2 = fl.cells
        if base_cell not in (s1, s2):
            raise GeometryError("base cell is not adjacent to the Gamma point")
        ga = la.matmul(inv(cx.charts[(s2, a2)]), cx.charts[(s1, a1)])  # s1 -> s2 via a
        gb = la.matmul(inv(cx.charts[(s2, b2)]), cx.charts[(s1, b1)])  # s1 -> s2 via b
        t1 = la.matmul(inv(gb), ga)          # loop in s1 coordinates
        t2 = la.matmul(gb, inv(ga))          # the same loop read in s2 coordinates
        if base_cell == s1:
            return [[t1], [_conj(inv(gb), t2)]]
        return [[t2], [_conj(ga, t1)]]
    if point.kind == "node":
        node = point.index
        mats = node_monodromy(cx, node)
        if cx.faces[node].dim == 2:
            a, b, m = cx.walls[node]
            rho = sorted(m)
            g = [la.matmul(inv(cx.charts[(b, m[k])]), cx.charts[(a, k)]) for k in rho[:2]]
            if base_cell == a:
                back = la.matmul(inv(g[1]), g[0])
                return [mats, [_conj(back, t) for t in mats]]
            if base_cell == b:
                return [[_conj(inv(g[0]), t) for t in mats], [_conj(inv(g[1]), t) for t in mats]]
            raise GeometryError("base cell is not adjacent to the Gamma point")
        va, vb = sorted(f for f in cx.subfaces[node] if cx.faces[f].dim == 0)
        if base_cell not in cx.cells_containing(node):
            raise GeometryError("base cell is not adjacent to the Gamma point")
        ka, kb = _unique_corner(cx, base_cell, va), _unique_corner(cx, base_cell, vb)
        direct = cx.charts[(base_cell, ka)]                      # cell -> chart a
        other = next(c for c in cx.cells_containing(node) if c != base_cell)
        oa, ob = _unique_corner(cx, other, va), _unique_corner(cx, other, vb)
        around = la.matmul(cx.charts[(other, oa)],
                           la.matmul(inv(cx.charts[(other, ob)]), cx.charts[(base_cell, kb)]))
        return [[_conj(direct, t) for t in mats], [_conj(around, t) for t in mats]]
    raise GeometryError(f"unknown Gamma point kind {point.kind!r}")


def invariant_sublattice(cx: AffineComplex, point: GammaRef, base_cell: int) -> InvariantLattices:
    """Monodromy-invariant sublattices at a Gamma point, in the coordinates of
    an adjacent cell; raises if two transport paths disagree."""
    routes = _routes(cx, point, base_cell)
    n = cx.dim
    results = [_lattices(r, n) for r in routes]
    first = results[0]
    for other in results[1:]:
        if not all(_same_span(x, y, n) for x, y in zip(first, other)):
            raise GeometryError("path dependence detected")
    inv, dual, perp, group = first
    return InvariantLattices(base_cell, routes[0], inv, dual, perp, group)


# ---------------------------------------------------------------------------
# balancing at Gamma vertices: the rule is isolated so alternatives can be swapped in


def literal_gamma_rule(total: tuple, lattices: InvariantLattices) -> bool:
    """Weighted sum vanishes modulo (i_* Lambda-check)^perp ∩ i_* Lambda."""
    return _in_saturated(lattices.balancing_group, total, len(total))


def strict_gamma_rule(total: tuple, lattices: InvariantLattices) -> bool:
    """Weighted sum vanishes exactly, as at smooth points."""
    return not any(total)


GAMMA_RULES: dict[str, Callable] = {"literal": literal_gamma_rule, "strict": strict_gamma_rule}


# ---------------------------------------------------------------------------
# validation


@dataclass
class VertexVerdict:
    vertex: int
    kind: str             # "smooth", "gamma" or "end"
    balanced: bool
    total: tuple          # weighted sum of outgoing directions, cell coordinates
    reason: str = ""

    def to_json(self) -> dict:
        return {"vertex": self.vertex, "kind": self.kind, "balanced": self.balanced,
                "deficit": [_num(x) for x in self.total], "reason": self.reason}


@dataclass
class ValidationReport:
    verdicts: list[VertexVerdict] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return all(v.balanced for v in self.verdicts)

    def verdict(self, vid: int) -> VertexVerdict:
        return next(v for v in self.verdicts if v.vertex == vid)

    def to_json(self) -> dict:
        return {"valid": self.valid, "vertices": [v.to_json() for v in self.verdicts]}


def _face_points(cx: AffineComplex, fid: int, cell: int) -> list[tuple]:
    for c, s in cx.faces[fid].reps:
        if c == cell:
            return [cx.cells[c].vertices[i] for i in sorted(s)]
    raise GeometryError(f"face {fid} is not a face of cell {cell}")


def _barycenter(points: list[tuple]) -> tuple:
    n = len(points)
    return tuple(Fraction(sum(p[i] for p in points), n) for i in range(len(points[0])))


def gamma_position(cx: AffineComplex, point: GammaRef, cell: int) -> tuple:
    fid = cx.gamma[point.index].faces[-1] if point.kind == "flag" else point.index
    return _barycenter(_face_points(cx, fid, cell))


def _position(cx: AffineComplex, v: TropicalVertex) -> tuple:
    if v.gamma is not None:
        return gamma_position(cx, v.gamma, v.cell)
    x = tuple(Fraction(c) for c in v.coords)
    if not cx.cells[v.cell].contains(x):
        raise GeometryError(f"vertex {v.id} does not lie in cell {v.cell}")
    return x


def _cell_vertices(cx: AffineComplex, cell: int) -> set[int]:
    return {cx.corner_vertex[(cell, k)] for k in range(len(cx.cells[cell].vertices))}


def _chart_point(cx, cell, vertex, x) -> tuple:
    k = _unique_corner(cx, cell, vertex)
    return la.matvec(cx.charts[(cell, k)], la.vsub(x, cx.cells[cell].vertices[k]))


def _to_chart(cx, cell, vertex, u) -> tuple:
    return la.matvec(cx.charts[(cell, _unique_corner(cx, cell, vertex))], u)


def _from_chart(cx, cell, vertex, u) -> tuple:
    return la.matvec(la.inverse(cx.charts[(cell, _unique_corner(cx, cell, vertex))]), u)


def _segment_hits(a, b, simplex, open_end: bool) -> bool:
    """Whether the segment (a, b) meets the simplex, excluding the endpoint a
    and, if ``open_end``, the endpoint b."""
    n = len(a)
    k = len(simplex)
    # unknowns: lambda_0..lambda_{k-1}, t
    rows = [[simplex[j][i] for j in range(k)] + [-(b[i] - a[i])] for i in range(n)]
    rhs = list(a)
    rows.append([1] * k + [0])
    rhs.append(1)
    sol = _solve_all(rows, rhs)
    if sol is None:
        return False
    *lam, t = sol
    hi_ok = t < 1 if open_end else t <= 1
    return all(x >= 0 for x in lam) and t > 0 and hi_ok


def _solve_all(rows, rhs):
    aug = [list(r) + [v] for r, v in zip(rows, rhs)]
    red, piv = la.rref(aug)
    ncols = len(rows[0])
    if ncols in piv:
        return None
    if len(piv) < ncols:
        return None  # degenerate position: treat as non-transverse
    sol = [Fraction(0)] * ncols
    for r, p in enumerate(piv):
        sol[p] = red[r][-1]
    return sol


def _check_segment(cx: AffineComplex, pa, pb, via: int, leg_end: GammaRef | None):
    """Raise if the straight segment in the chart of ``via`` crosses Gamma."""
    for idx, fl in enumerate(cx.gamma):
        wall = fl.faces[-1]
        if via not in cx.subfaces[wall]:
            continue
        cell = fl.cells[0]
        simplex = [_chart_point(cx, cell, via, _barycenter(_face_points(cx, f, cell))) for f in fl.faces]
        is_target = leg_end is not None and leg_end.kind == "flag" and leg_end.index == idx
        if leg_end is not None and leg_end.kind == "node" and leg_end.index in fl.faces:
            is_target = True
        if _segment_hits(pa, pb, simplex, open_end=is_target):
            raise GeometryError("edge crosses the discriminant locus in its interior")


def _common_vertex(cx, ca, cb, via):
    common = _cell_vertices(cx, ca) & _cell_vertices(cx, cb)
    if via is not None:
        if via not in common:
            raise GeometryError(f"vertex {via} is not shared by cells {ca} and {cb}")
        return via
    if not common:
        raise GeometryError(f"cells {ca} and {cb} share no vertex: give the edge a route")
    return min(common)


def _oriented(cx: AffineComplex, curve: TropicalGraph) -> dict:
    """vertex id -> list of (weight, outgoing direction in its cell coordinates, edge)."""
    out = {v.id: [] for v in curve.vertices}
    for e in curve.edges:
        if e.weight <= 0:
            raise GeometryError("edge weights must be positive")
        if la.primitive(e.direction) != la.vec(e.direction):
            raise GeometryError(f"edge direction {tuple(e.direction)} is not primitive")
        va, vb = curve.vertex(e.start), curve.vertex(e.end)
        via = _common_vertex(cx, va.cell, vb.cell, e.via)
        u = la.vec(e.direction)
        if e.frame is not None:
            u = _from_chart(cx, va.cell, e.frame, u)
        u_chart = _to_chart(cx, va.cell, via, u)
        pa = _chart_point(cx, va.cell, via, _position(cx, va))
        pb = _chart_point(cx, vb.cell, via, _position(cx, vb))
        step = la.vsub(pb, pa)
        if not any(step) or la.rank([step, u_chart]) != 1 or la.dot(step, u_chart) <= 0:
            raise GeometryError(f"edge {e.start}->{e.end}: direction is not tangent to the segment")
        if va.gamma is not None and vb.gamma is not None:
            raise GeometryError("an edge joins two points of the discriminant")
        if va.gamma is not None:
            _check_segment(cx, pb, pa, via, va.gamma)
        else:
            _check_segment(cx, pa, pb, via, vb.gamma)
        out[va.id].append((e.weight, u, e))
        out[vb.id].append((e.weight, la.vscale(-1, _from_chart(cx, vb.cell, via, u_chart)), e))
    return out


def validate(curve: TropicalGraph, cx: AffineComplex, gamma_rule: str = "literal") -> ValidationReport:
    """Balancing verdict at every vertex of the curve."""
    if not curve.is_connected():
        raise GeometryError("the tropical curve is not connected")
    rule = GAMMA_RULES[gamma_rule]
    spokes = _oriented(cx, curve)
    report = ValidationReport()
    for v in curve.vertices:
        total = tuple([0] * cx.dim)
        for w, u, _ in spokes[v.id]:
            total = la.vadd(total, la.vscale(w, u))
        if v.end:
            if len(spokes[v.id]) != 1:
                raise GeometryError(f"end vertex {v.id} must be univalent")
            report.verdicts.append(VertexVerdict(v.id, "end", True, total))
            continue
        if v.gamma is None:
            report.verdicts.append(VertexVerdict(v.id, "smooth", not any(total), total,
                                                 "" if not any(total) else "unbalanced"))
            continue
        lat = invariant_sublattice(cx, v.gamma, v.cell)
        bad = [u for _, u, _ in spokes[v.id] if not _in_saturated(lat.invariant, u, cx.dim)]
        if bad:
            report.verdicts.append(VertexVerdict(v.id, "gamma", False, total,
                                                 "leg direction is not monodromy invariant"))
            continue
        ok = rule(total, lat)
        report.verdicts.append(VertexVerdict(v.id, "gamma", ok, total, "" if ok else "unbalanced"))
    return report


# ---------------------------------------------------------------------------
# file format


def curve_from_json(data: dict) -> TropicalGraph:
    verts = []
    for v in data["vertices"]:
        g = v.get("gamma")
        verts.append(TropicalVertex(
            int(v["id"]), int(v["cell"]),
            tuple(Fraction(x) for x in v["coords"]) if v.get("coords") is not None else None,
            GammaRef(g["kind"], int(g["index"])) if g else None,
            bool(v.get("end", False))))
    edges = [TropicalEdge(int(e["start"]), int(e["end"]), int(e.get("weight", 1)),
                          tuple(int(x) for x in e["direction"]), e.get("frame"), e.get("via"))
             for e in data.get("edges", [])]
    next_id = max((v.id for v in verts), default=-1) + 1
    for leg in data.get("legs", []):
        g = leg["gamma"]
        verts.append(TropicalVertex(next_id, int(leg.get("base_cell", _vertex_cell(verts, leg["vertex"]))),
                                    None, GammaRef(g["kind"], int(g["index"]))))
        edges.append(TropicalEdge(int(leg["vertex"]), next_id, int(leg.get("weight", 1)),
                                  tuple(int(x) for x in leg["direction"]), leg.get("frame"), leg.get("via")))
        next_id += 1
    for v in verts:
        if v.coords is None and v.gamma is None:
            raise GeometryError(f"vertex {v.id} has neither coordinates nor a Gamma point")
    return TropicalGraph(verts, edges)


def _vertex_cell(verts, vid):
    return next(v.cell for v in verts if v.id == vid)


def curve_to_json(curve: TropicalGraph) -> dict:
    def vert(v):
        d = {"id": v.id, "cell": v.cell}
        if v.coords is not None:
            d["coords"] = [str(Fraction(x)) for x in v.coords]
        if v.gamma is not None:
            d["gamma"] = {"kind": v.gamma.kind, "index": v.gamma.index}
        if v.end:
            d["end"] = True
        return d

    def edge(e):
        d = {"start": e.start, "end": e.end, "weight": e.weight, "direction": list(e.direction)}
        if e.frame is not None:
            d["frame"] = e.frame
        if e.via is not None:
            d["via"] = e.via
        return d

    return {"vertices": [vert(v) for v in curve.vertices], "edges": [edge(e) for e in curve.edges]}


def loads_curve(text: str) -> TropicalGraph:
    return curve_from_json(json.loads(text))


def dumps_curve(curve: TropicalGraph) -> str:
    return json.dumps(curve_to_json(curve), indent=1, sort_keys=True)


# ---------------------------------------------------------------------------
# fixtures


def tropical_line(weights=(1, 1, 1), scale: int = 3) -> tuple[TropicalGraph, AffineComplex]:
    """The tropical line with rays e1, e2, -e1-e2 from the centre of a
    triangle of size ``scale``, ending on its edges."""
    tri = LatticePolytope([(0, 0), (scale, 0), (0, scale)])
    cx = AffineComplex([tri], [])
    c = Fraction(scale, 3)
    centre = (c, c)
    ends = [(Fraction(scale) - c, c), (c, Fraction(scale) - c), (Fraction(0), Fraction(0))]
    dirs = [(1, 0), (0, 1), (-1, -1)]
    verts = [TropicalVertex(0, 0, centre)] + [TropicalVertex(i + 1, 0, ends[i], end=True) for i in range(3)]
    edges = [TropicalEdge(0, i + 1, weights[i], dirs[i]) for i in range(3)]
    return TropicalGraph(verts, edges), cx


def focus_focus_leg(invariant: bool = True, n: int = 1) -> tuple[TropicalGraph, AffineComplex]:
    """A single leg ending on the focus-focus point of ``focus_focus_pair(n)``,
    either along the wall (the invariant direction) or across it."""
    cx = focus_focus_pair(n)
    half = Fraction(1, 2)
    if invariant:
        start, direction = (Fraction(0), Fraction(0)), (1, 0)
    else:
        start, direction = (half, half), (0, -1)
    verts = [TropicalVertex(0, 0, start, end=True), TropicalVertex(1, 0, gamma=GammaRef("flag", 0))]
    return TropicalGraph(verts, [TropicalEdge(0, 1, 1, direction)]), cx

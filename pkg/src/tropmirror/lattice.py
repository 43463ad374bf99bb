"""Exact lattice polytopes, cones and fans.

Polytopes carry both a vertex and a facet description.  The facet description
is obtained from the vertices by an exact double-description pass, and the
vertex description from inequalities by the same routine applied to the
homogenised system.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
import math
from math import floor, ceil
from typing import Iterable, Sequence

from . import linalg as la


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class Lattice:
    rank: int

    def __post_init__(self):
        if self.rank < 0:
            raise ValueError("lattice rank must be non-negative")

    def check(self, v) -> tuple:
        if len(v) != self.rank:
            raise GeometryError(f"vector {tuple(v)} does not have {self.rank} coordinates")
        return la.vec(v)


# ---------------------------------------------------------------------------
# double description


def _extreme_rays(rows: list[tuple], dim: int) -> list[tuple]:
    """Extreme rays of the pointed cone ``{y : <r, y> >= 0 for r in rows}``.

    ``rows`` must span ``Q^dim``.  Rays are returned as primitive integer vectors.
    """
    rows = [la.primitive(r) for r in rows]
    basis_idx: list[int] = []
    for i, r in enumerate(rows):
        if la.rank([rows[j] for j in basis_idx] + [r]) > len(basis_idx):
            basis_idx.append(i)
            if len(basis_idx) == dim:
                break
    if len(basis_idx) < dim:
        raise GeometryError("constraint system is not full rank")
    inv = la.inverse([rows[i] for i in basis_idx])
    rays = [la.primitive(col) for col in la.transpose(inv)]
    processed = list(basis_idx)

    def zero_set(ray):
        z = 0
        for k, i in enumerate(processed):
            if la.dot(rows[i], ray) == 0:
                z |= 1 << k
        return z

    zsets = [zero_set(r) for r in rays]
    for i, row in enumerate(rows):
        if i in basis_idx:
            continue
        vals = [la.dot(row, r) for r in rays]
        pos = [k for k, v in enumerate(vals) if v > 0]
        neg = [k for k, v in enumerate(vals) if v < 0]
        zer = [k for k, v in enumerate(vals) if v == 0]
        new_rays = []
        for p in pos:
            for q in neg:
                common = zsets[p] & zsets[q]
                if bin(common).count("1") < dim - 2:
                    continue
                adjacent = True
                for k in range(len(rays)):
                    if k != p and k != q and (zsets[k] & common) == common:
                        adjacent = False
                        break
                if not adjacent:
                    continue
                r = la.vsub(la.vscale(vals[p], rays[q]), la.vscale(vals[q], rays[p]))
                new_rays.append(la.primitive(r))
        kept = [rays[k] for k in pos + zer] + new_rays
        processed.append(i)
        rays = kept
        zsets = [zero_set(r) for r in rays]
    return sorted(set(rays))


# ---------------------------------------------------------------------------
# polytopes


@dataclass(frozen=True, eq=False)
class LatticePolytope:
    """Convex hull of finitely many rational points in ``Q^rank``.

    ``facets`` holds pairs ``(normal, offset)`` meaning ``<normal, x> >= -offset``
    with primitive integer normals.  For lower-dimensional polytopes the
    normals are one valid choice modulo ``equations``.
    """

    rank: int
    vertices: tuple
    facets: tuple
    equations: tuple
    dim: int
    facet_vertex_sets: tuple = field(repr=False)

    def __init__(self, points: Iterable[Sequence], rank: int | None = None):
        pts = sorted(set(la.vec(p) for p in points))
        if rank is None:
            if not pts:
                raise GeometryError("rank needed for the empty polytope")
            rank = len(pts[0])
        for p in pts:
            Lattice(rank).check(p)
        data = _hull(pts, rank)
        for k, v in data.items():
            object.__setattr__(self, k, v)
        object.__setattr__(self, "rank", rank)

    # -- constructors -----------------------------------------------------
    @classmethod
    def from_inequalities(cls, normals: Sequence[Sequence], offsets: Sequence) -> "LatticePolytope":
        """Bounded polyhedron ``{x : <normal_i, x> >= -offset_i}``."""
        n = len(normals[0])
        rows = [(Fraction(o),) + tuple(Fraction(a) for a in nrm) for nrm, o in zip(normals, offsets)]
        rows.append((Fraction(1),) + (Fraction(0),) * n)
        if la.rank(rows) < n + 1:
            raise GeometryError("inequalities do not define a bounded polytope")
        pts = []
        for ray in _extreme_rays(rows, n + 1):
            if ray[0] == 0:
                raise GeometryError("inequalities define an unbounded polyhedron")
            pts.append(tuple(Fraction(x, ray[0]) for x in ray[1:]))
        return cls(pts, rank=n)

    # -- basic predicates -------------------------------------------------
    @property
    def ambient(self) -> Lattice:
        return Lattice(self.rank)

    @property
    def is_lattice(self) -> bool:
        return all(la.is_integral(v) for v in self.vertices)

    @property
    def rational_vertices(self) -> bool:
        return not self.is_lattice

    @property
    def is_full_dimensional(self) -> bool:
        return self.dim == self.rank

    def __eq__(self, other):
        return isinstance(other, LatticePolytope) and self.rank == other.rank and self.vertices == other.vertices

    def __hash__(self):
        return hash((self.rank, self.vertices))

    def __repr__(self):
        return f"LatticePolytope(rank={self.rank}, dim={self.dim}, vertices={list(self.vertices)})"

    def contains(self, x, strict: bool = False) -> bool:
        x = la.vec(x)
        if any(la.dot(a, x) != b for a, b in self.equations):
            return False
        for nrm, off in self.facets:
            val = la.dot(nrm, x) + off
            if val < 0 or (strict and val == 0):
                return False
        return True

    def interior_contains(self, x) -> bool:
        """Relative-interior membership."""
        return self.contains(x, strict=True)

    def translate(self, t) -> "LatticePolytope":
        return LatticePolytope([la.vadd(v, t) for v in self.vertices], rank=self.rank)

    def dilate(self, k) -> "LatticePolytope":
        return LatticePolytope([la.vscale(k, v) for v in self.vertices], rank=self.rank)

    def linear_image(self, m) -> "LatticePolytope":
        return LatticePolytope([la.matvec(m, v) for v in self.vertices], rank=len(m))

    @cached_property
    def face_poset(self) -> "FacePoset":
        return faces(self)

    def __str__(self):
        return dumps_polytope(self)


def _hull(pts: list[tuple], rank: int) -> dict:
    if not pts:
        return dict(vertices=(), facets=(), equations=(), dim=-1, facet_vertex_sets=())
    p0 = pts[0]
    diffs = [la.vsub(p, p0) for p in pts[1:]]
    nonzero = [d for d in diffs if any(d)]
    if nonzero:
        basis = la.saturated_span([la.primitive(d) for d in nonzero], rank)
    else:
        basis = []
    k = len(basis)
    # equations: covectors vanishing on the affine hull direction
    eqs = []
    if k < rank:
        comp = la.integer_kernel(basis, rank) if basis else [
            tuple(1 if i == j else 0 for j in range(rank)) for i in range(rank)]
        eqs = [(c, la.dot(c, p0)) for c in comp]
    if k == 0:
        return dict(vertices=(p0,), facets=(), equations=tuple(eqs), dim=0,
                    facet_vertex_sets=())
    if k == rank:
        emat = la.identity(rank)
        origin = (0,) * rank
    else:
        emat = la.transpose(basis)
        origin = p0
    et = la.transpose(emat)
    coords = []
    for p in pts:
        c = la.solve(emat, la.vsub(p, origin))
        coords.append(c)
    if k == 1:
        xs = [c[0] for c in coords]
        lo, hi = min(xs), max(xs)
        ints = [((1,), -lo), ((-1,), hi)]
    else:
        rows = [(1,) + tuple(c) for c in coords]
        ints = []
        for ray in _extreme_rays(rows, k + 1):
            ints.append((ray[1:], ray[0]))
    verts = []
    fsets = []
    for a, c in ints:
        fsets.append(frozenset(i for i, x in enumerate(coords) if la.dot(a, x) + c == 0))
    for i, x in enumerate(coords):
        tight = [a for (a, c), s in zip(ints, fsets) if i in s]
        if tight and la.rank(tight) == k:
            verts.append(i)
    vert_pts = [pts[i] for i in verts]
    order = sorted(range(len(vert_pts)), key=lambda j: vert_pts[j])
    vert_pts = [vert_pts[j] for j in order]
    index = {verts[j]: new for new, j in enumerate(order)}
    facets = []
    facet_sets = []
    for (a, c), s in zip(ints, fsets):
        if k == rank:
            nrm = la.primitive(a)
        else:
            sol = la.solve(et, a)
            nrm = la.primitive(sol)
        scale = None
        # offset from any vertex on the facet
        vs = frozenset(index[i] for i in s if i in index)
        v0 = vert_pts[next(iter(vs))]
        off = -la.dot(nrm, v0)
        facets.append((nrm, la._norm(off)))
        facet_sets.append(vs)
    pairs = sorted(zip(facets, facet_sets), key=lambda t: (t[0][0], t[0][1]))
    return dict(
        vertices=tuple(vert_pts),
        facets=tuple(p[0] for p in pairs),
        equations=tuple(eqs),
        dim=k,
        facet_vertex_sets=tuple(p[1] for p in pairs),
    )


@dataclass(frozen=True)
class Face:
    vertices: frozenset  # indices into the parent's vertex list
    dim: int


class FacePoset:
    """All faces of a polytope (including the empty face and the polytope)."""

    def __init__(self, polytope: LatticePolytope, faces_: list[Face]):
        self.polytope = polytope
        self.faces = sorted(faces_, key=lambda f: (f.dim, sorted(f.vertices)))
        self.index = {f.vertices: i for i, f in enumerate(self.faces)}

    def of_dim(self, d: int) -> list[Face]:
        return [f for f in self.faces if f.dim == d]

    def f_vector(self) -> tuple:
        return tuple(len(self.of_dim(d)) for d in range(self.polytope.dim))

    def contains(self, big: Face, small: Face) -> bool:
        return small.vertices <= big.vertices

    def cover_relations(self) -> list[tuple[int, int]]:
        out = []
        for i, f in enumerate(self.faces):
            for j, g in enumerate(self.faces):
                if g.dim == f.dim + 1 and f.vertices <= g.vertices:
                    out.append((i, j))
        return out

    def points(self, face: Face) -> list[tuple]:
        return [self.polytope.vertices[i] for i in sorted(face.vertices)]

    def __len__(self):
        return len(self.faces)


def _affine_dim(points: list[tuple]) -> int:
    if not points:
        return -1
    p0 = points[0]
    return la.rank([la.vsub(p, p0) for p in points[1:]]) if len(points) > 1 else 0


def faces(polytope: LatticePolytope) -> FacePoset:
    verts = polytope.vertices
    top = frozenset(range(len(verts)))
    found = {top: polytope.dim}
    if polytope.dim > 0:
        frontier = [top]
        facet_sets = list(polytope.facet_vertex_sets)
        while frontier:
            nxt = []
            for s in frontier:
                d = found[s]
                if d == 0:
                    continue
                cands = {s & g for g in facet_sets if (s & g) != s}
                for c in cands:
                    if c in found or not c:
                        continue
                    cd = _affine_dim([verts[i] for i in c])
                    if cd == d - 1:
                        found[c] = cd
                        nxt.append(c)
            frontier = nxt
    found[frozenset()] = -1
    return FacePoset(polytope, [Face(s, d) for s, d in found.items()])


def triangulate(polytope: LatticePolytope) -> list[tuple]:
    """Pulling triangulation: simplices as tuples of vertex indices."""
    poset = polytope.face_poset
    by_dim: dict[int, list[frozenset]] = {}
    for f in poset.faces:
        by_dim.setdefault(f.dim, []).append(f.vertices)
    memo: dict[frozenset, list[tuple]] = {}

    def tri(face: frozenset, d: int) -> list[tuple]:
        if face in memo:
            return memo[face]
        if d == 0:
            out = [tuple(face)]
        else:
            apex = min(face)
            out = []
            for sub in by_dim.get(d - 1, []):
                if sub <= face and apex not in sub:
                    out.extend(s + (apex,) for s in tri(sub, d - 1))
        memo[face] = out
        return out

    return tri(frozenset(range(len(polytope.vertices))), polytope.dim)


def volume(polytope: LatticePolytope) -> Fraction:
    """Euclidean volume of a full-dimensional polytope (0 otherwise)."""
    n = polytope.rank
    if polytope.dim < n:
        return Fraction(0)
    total = Fraction(0)
    for simplex in triangulate(polytope):
        pts = [polytope.vertices[i] for i in simplex]
        total += abs(Fraction(la.det([la.vsub(p, pts[0]) for p in pts[1:]])))
    return total / _factorial(n)


def normalized_volume(polytope: LatticePolytope) -> int | Fraction:
    """``n! * volume``; the number of unimodular simplices for lattice polytopes."""
    return la._norm(volume(polytope) * _factorial(polytope.rank))


def _factorial(n: int) -> int:
    out = 1
    for k in range(2, n + 1):
        out *= k
    return out


def intersection(p: LatticePolytope, q: LatticePolytope) -> LatticePolytope | None:
    """``p ∩ q`` (rational vertices allowed), or None when empty."""
    normals, offsets = [], []
    for poly in (p, q):
        for nrm, off in poly.facets:
            normals.append(nrm)
            offsets.append(off)
        for nrm, rhs in poly.equations:
            normals += [nrm, la.vscale(-1, nrm)]
            offsets += [-rhs, rhs]
    try:
        out = LatticePolytope.from_inequalities(normals, offsets)
    except GeometryError:
        return None
    return out if out.vertices else None


def lattice_points(polytope: LatticePolytope) -> list[tuple]:
    """Integer points of the polytope by bounding-box scan."""
    if polytope.dim < 0:
        return []
    n = polytope.rank
    lo = [ceil(min(Fraction(v[i]) for v in polytope.vertices)) for i in range(n)]
    hi = [floor(max(Fraction(v[i]) for v in polytope.vertices)) for i in range(n)]
    out = []
    for x in itertools.product(*(range(a, b + 1) for a, b in zip(lo, hi))):
        if polytope.contains(x):
            out.append(tuple(x))
    return out


def interior_lattice_points(polytope: LatticePolytope) -> list[tuple]:
    """Integer points of the relative interior."""
    if polytope.dim <= 0:
        return []
    return [p for p in lattice_points(polytope) if polytope.interior_contains(p)]


def dual_polytope(polytope: LatticePolytope) -> LatticePolytope:
    """``{n : <m, n> >= -1 for all m in P}``; may have rational vertices."""
    if not polytope.is_full_dimensional or not polytope.contains((0,) * polytope.rank, strict=True):
        raise GeometryError("not full-dimensional around 0")
    pts = [tuple(Fraction(a) / Fraction(off) for a in nrm) for nrm, off in polytope.facets]
    return LatticePolytope(pts, rank=polytope.rank)


def is_reflexive(polytope: LatticePolytope) -> bool:
    if not polytope.is_lattice or not polytope.is_full_dimensional:
        return False
    origin = (0,) * polytope.rank
    if not polytope.contains(origin, strict=True):
        return False
    if any(off != 1 for _, off in polytope.facets):
        return False
    return interior_lattice_points(polytope) == [origin]


def minkowski_sum(p: LatticePolytope, q: LatticePolytope) -> LatticePolytope:
    if p.rank != q.rank:
        raise GeometryError("lattice mismatch in Minkowski sum")
    return LatticePolytope([la.vadd(a, b) for a in p.vertices for b in q.vertices], rank=p.rank)


def gl_transform(polytope: LatticePolytope, m) -> LatticePolytope:
    if not la.is_unimodular(m):
        raise GeometryError("matrix is not in GL(n, Z)")
    return polytope.linear_image(m)


# ---------------------------------------------------------------------------
# text format


def dumps_polytope(p: LatticePolytope) -> str:
    lines = [f"dim={p.rank} count={len(p.vertices)}"]
    for v in p.vertices:
        lines.append(" ".join(str(x) for x in v))
    return "\n".join(lines) + "\n"


def loads_polytope(text: str) -> LatticePolytope:
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise ValueError("empty polytope file")
    header = dict(tok.split("=", 1) for tok in lines[0].split())
    try:
        n, k = int(header["dim"]), int(header["count"])
    except (KeyError, ValueError) as exc:
        raise ValueError(f"bad polytope header: {lines[0]!r}") from exc
    rows = [tuple(Fraction(t) for t in ln.split()) for ln in lines[1:]]
    if len(rows) != k or any(len(r) != n for r in rows):
        raise ValueError("polytope body does not match header")
    return LatticePolytope(rows, rank=n)


# ---------------------------------------------------------------------------
# cones and fans


@dataclass(frozen=True)
class Cone:
    rank: int
    generators: tuple
    lineality: tuple = ()

    @classmethod
    def spanned_by(cls, vectors: Iterable[Sequence], rank: int) -> "Cone":
        """Cone generated by the vectors, reduced to extreme rays plus lineality."""
        vs = sorted(set(la.primitive(v) for v in vectors if any(v)))
        if not vs:
            return cls(rank, ())
        span = la.saturated_span(vs, rank)
        k = len(span)
        emat = la.transpose(span)
        coords = [la.solve(emat, v) for v in vs]
        rays_dual = _extreme_rays(coords, k)
        if la.rank(rays_dual) == k:
            gens = []
            for v, c in zip(vs, coords):
                tight = [r for r in rays_dual if la.dot(r, c) == 0]
                if k == 1 or (tight and la.rank(tight) == k - 1):
                    gens.append(v)
            return cls(rank, tuple(sorted(set(gens))))
        lin_dirs = []
        # non-pointed: split off lineality space (directions whose negatives are in the cone)
        for v in vs:
            if _in_cone([la.vscale(-1, v)], vs):
                lin_dirs.append(v)
        lin = la.saturated_span(lin_dirs, rank)
        others = [v for v in vs if v not in lin_dirs]
        return cls(rank, tuple(others), tuple(lin))

    @property
    def dim(self) -> int:
        return la.rank(list(self.generators) + list(self.lineality)) if (self.generators or self.lineality) else 0

    @property
    def is_strictly_convex(self) -> bool:
        return not self.lineality

    def contains(self, x) -> bool:
        return _in_cone([la.vec(x)], list(self.generators) + list(self.lineality)
                        + [la.vscale(-1, l) for l in self.lineality])


def _in_cone(points: list[tuple], gens: list[tuple]) -> bool:
    """Exact membership of each point in cone(gens), via Caratheodory subsets."""
    for x in points:
        if not any(x):
            continue
        ok = False
        n = len(x)
        for size in range(1, min(len(gens), n) + 1):
            for sub in itertools.combinations(gens, size):
                m = la.transpose(sub)
                sol = la.solve(m, x)
                if sol is not None and all(c >= 0 for c in sol):
                    ok = True
                    break
            if ok:
                break
        if not ok:
            return False
    return True


class Fan:
    """Finite fan given by primitive rays and cones as sets of ray indices.

    Only pointed (strictly convex) cones are stored; every fan contains the
    zero cone ``frozenset()``.
    """

    def __init__(self, rank: int, rays: Sequence[Sequence], cones: Iterable[Iterable[int]]):
        self.rank = rank
        self.rays = tuple(la.primitive(r) for r in rays)
        closed: set[frozenset] = {frozenset()}
        for c in cones:
            c = frozenset(c)
            closed.add(c)
        maximal = [c for c in closed if not any(c < d for d in closed)]
        allc = set(closed)
        for c in maximal:
            allc |= self._faces_of(c)
        self.cones = sorted(allc, key=lambda c: (len(c), sorted(c)))
        self._dims = {c: (la.rank([self.rays[i] for i in c]) if c else 0) for c in self.cones}

    def _faces_of(self, c: frozenset) -> set[frozenset]:
        if not c:
            return {c}
        gens = [self.rays[i] for i in sorted(c)]
        d = la.rank(gens)
        out = {c}
        if d <= 1:
            out.add(frozenset())
            return out
        span = la.saturated_span(gens, self.rank)
        emat = la.transpose(span)
        coords = {i: la.solve(emat, self.rays[i]) for i in c}
        for ray in _extreme_rays(list(coords.values()), d):
            facet = frozenset(i for i in c if la.dot(ray, coords[i]) == 0)
            if facet != c:
                out |= self._faces_of(facet)
        return out

    def dim_of(self, cone: frozenset) -> int:
        return self._dims[cone]

    @property
    def dim(self) -> int:
        return max(self._dims.values())

    @property
    def maximal_cones(self) -> list[frozenset]:
        return [c for c in self.cones if not any(c < d for d in self.cones)]

    def cone(self, c: frozenset) -> Cone:
        return Cone(self.rank, tuple(sorted(self.rays[i] for i in c)))

    def walls(self) -> dict[frozenset, list[frozenset]]:
        """Codimension-one cones mapped to the maximal cones containing them."""
        out: dict[frozenset, list[frozenset]] = {}
        for m in self.maximal_cones:
            if self._dims[m] != self.rank:
                continue
            for c in self.cones:
                if c < m and self._dims[c] == self.rank - 1:
                    out.setdefault(c, []).append(m)
        return out

    @property
    def is_complete(self) -> bool:
        if self.rank == 0:
            return True
        if any(self._dims[m] != self.rank for m in self.maximal_cones):
            return False
        if self.rank == 1:
            return sorted(self.rays) == [(-1,), (1,)]
        return all(len(v) == 2 for v in self.walls().values())

    def containing(self, x) -> list[frozenset]:
        """Maximal cones containing the point x."""
        return [m for m in self.maximal_cones if self.cone(m).contains(x)]

    def index_of(self, gens: Iterable[Sequence]) -> frozenset:
        idx = frozenset(self.rays.index(la.primitive(g)) for g in gens)
        if idx not in self.cones:
            raise GeometryError("not a cone of the fan")
        return idx

    def __repr__(self):
        return f"Fan(rank={self.rank}, rays={len(self.rays)}, cones={len(self.cones)})"


def normal_fan(polytope: LatticePolytope) -> Fan:
    """Inner normal fan; the cone of a face is spanned by normals of facets containing it."""
    if not polytope.is_full_dimensional:
        raise GeometryError("normal fan needs a full-dimensional polytope")
    rays = [nrm for nrm, _ in polytope.facets]
    poset = polytope.face_poset
    cones = []
    for f in poset.faces:
        if f.dim < 0:
            continue
        cones.append(frozenset(i for i, s in enumerate(polytope.facet_vertex_sets) if f.vertices <= s))
    return Fan(polytope.rank, rays, cones)


def normal_fan_face_map(polytope: LatticePolytope) -> dict[frozenset, frozenset]:
    """Face vertex-set -> cone (ray-index set) of the normal fan."""
    out = {}
    for f in polytope.face_poset.faces:
        if f.dim < 0:
            continue
        out[f.vertices] = frozenset(i for i, s in enumerate(polytope.facet_vertex_sets) if f.vertices <= s)
    return out


# ---------------------------------------------------------------------------
# reflexive polygons


def _hnf_2xm(cols: list[tuple]) -> tuple:
    """Row-style Hermite normal form ``U @ M`` (U in GL(2, Z)) of a 2 x m matrix given by columns."""
    rows = [list(r) for r in zip(*cols)]
    m = len(cols)
    pivot_row = 0
    for j in range(m):
        if pivot_row == 2:
            break
        # clear rows below pivot_row in column j by gcd steps
        while any(rows[i][j] for i in range(pivot_row + 1, 2)):
            i = pivot_row + 1
            if rows[pivot_row][j] == 0 or abs(rows[i][j]) < abs(rows[pivot_row][j]) and rows[i][j]:
                rows[pivot_row], rows[i] = rows[i], rows[pivot_row]
                continue
            q = rows[i][j] // rows[pivot_row][j]
            rows[i] = [a - q * b for a, b in zip(rows[i], rows[pivot_row])]
        if rows[pivot_row][j] == 0:
            continue
        if rows[pivot_row][j] < 0:
            rows[pivot_row] = [-a for a in rows[pivot_row]]
        for i in range(pivot_row):
            q = rows[i][j] // rows[pivot_row][j]
            rows[i] = [a - q * b for a, b in zip(rows[i], rows[pivot_row])]
        pivot_row += 1
    return tuple(tuple(r) for r in rows)


def _cyclic_vertices(polygon: LatticePolytope) -> list[tuple]:
    verts = list(polygon.vertices)
    cx = sum(Fraction(v[0]) for v in verts) / len(verts)
    cy = sum(Fraction(v[1]) for v in verts) / len(verts)
    return sorted(verts, key=lambda v: math.atan2(float(v[1] - cy), float(v[0] - cx)))


def polygon_normal_form(polygon: LatticePolytope) -> tuple:
    """A GL(2, Z) invariant of a lattice polygon containing the origin that
    determines it up to GL(2, Z): the least Hermite normal form of its cyclic
    vertex matrix over all starting vertices and both orientations."""
    if polygon.rank != 2 or polygon.dim != 2:
        raise GeometryError("polygon_normal_form needs a full-dimensional polygon in rank 2")
    cyc = _cyclic_vertices(polygon)
    best = None
    for order in (cyc, cyc[::-1]):
        for s in range(len(order)):
            form = _hnf_2xm(order[s:] + order[:s])
            if best is None or form < best:
                best = form
    return best


def _strictly_inside(poly: list[tuple], p: tuple) -> bool:
    """poly in counterclockwise order."""
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        if (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) <= 0:
            return False
    return True


def _ccw_hull(points: list[tuple]) -> list[tuple]:
    pts = sorted(set(points))
    if len(pts) < 3:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def enumerate_reflexive_polygons(bound: int = 3) -> list[LatticePolytope]:
    """All reflexive polygons with vertices in ``[-bound, bound]^2`` up to
    GL(2, Z), by depth-first search over vertex sets in convex position whose
    hull has no interior lattice point other than the origin."""
    box = [(x, y) for x in range(-bound, bound + 1) for y in range(-bound, bound + 1)]
    others = [p for p in box if p != (0, 0)]
    cands = [p for p in others if math.gcd(*p) == 1]
    found: dict = {}

    def bad_interior(hull):
        return any(_strictly_inside(hull, p) for p in others)

    def visit(chosen: list, start: int):
        if len(chosen) >= 3:
            hull = _ccw_hull(chosen)
            if len(hull) != len(chosen) or bad_interior(hull):
                return
            if _strictly_inside(hull, (0, 0)):
                poly = LatticePolytope(hull)
                if is_reflexive(poly):
                    found.setdefault(polygon_normal_form(poly), poly)
        for i in range(start, len(cands)):
            visit(chosen + [cands[i]], i + 1)

    visit([], 0)
    return [found[k] for k in sorted(found)]

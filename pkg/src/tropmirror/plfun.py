"""Piecewise-linear functions on fans."""
from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence

from . import linalg as la
from .lattice import Fan, GeometryError, LatticePolytope


class PLFunction:
    """One linear representative (a covector) per maximal cone of a fan.

    Convexity here is the "upper" convention: ``f`` is convex when it is the
    maximum of its linear pieces, and its Newton polytope is
    ``{n : <m, n> >= -f(m)}``.
    """

    def __init__(self, fan: Fan, linear_part: Mapping[frozenset, Sequence]):
        self.fan = fan
        self.linear_part = {frozenset(k): la.vec(v) for k, v in linear_part.items()}
        missing = [m for m in fan.maximal_cones if m not in self.linear_part]
        if missing:
            raise GeometryError(f"no covector for maximal cones {missing}")
        self._check_agreement()

    @classmethod
    def from_ray_values(cls, fan: Fan, values: Sequence) -> "PLFunction":
        """PL function with prescribed values on the primitive ray generators."""
        pieces = {}
        for m in fan.maximal_cones:
            idx = sorted(m)
            a = [fan.rays[i] for i in idx]
            b = [values[i] for i in idx]
            sol = la.solve(a, b)
            if sol is None:
                raise GeometryError("ray values are not linear on a maximal cone")
            if fan.dim_of(m) < fan.rank:
                raise GeometryError("maximal cone is not full-dimensional")
            pieces[m] = sol
        return cls(fan, pieces)

    @classmethod
    def zero(cls, fan: Fan) -> "PLFunction":
        return cls(fan, {m: (0,) * fan.rank for m in fan.maximal_cones})

    def _check_agreement(self):
        for m1 in self.fan.maximal_cones:
            for m2 in self.fan.maximal_cones:
                if m1 >= m2:
                    continue
                for i in m1 & m2:
                    r = self.fan.rays[i]
                    if la.dot(self.linear_part[m1], r) != la.dot(self.linear_part[m2], r):
                        raise GeometryError("linear pieces disagree on a shared face")

    @property
    def integral(self) -> bool:
        return all(la.is_integral(v) for v in self.linear_part.values())

    def __call__(self, x):
        return eval_pl(self, x)

    def __add__(self, other: "PLFunction") -> "PLFunction":
        if other.fan is not self.fan:
            raise GeometryError("PL functions live on different fans")
        return PLFunction(self.fan, {k: la.vadd(v, other.linear_part[k]) for k, v in self.linear_part.items()})

    def __sub__(self, other: "PLFunction") -> "PLFunction":
        return self + other.scale(-1)

    def scale(self, c) -> "PLFunction":
        return PLFunction(self.fan, {k: la.vscale(c, v) for k, v in self.linear_part.items()})

    def ray_values(self) -> list:
        out = []
        for i, r in enumerate(self.fan.rays):
            m = next(c for c in self.fan.maximal_cones if i in c)
            out.append(la.dot(self.linear_part[m], r))
        return out

    def kinks(self) -> dict[frozenset, object]:
        """Wall -> kink, the jump in slope across the wall along its primitive normal."""
        out = {}
        for wall, (k1, k2) in self.fan.walls().items():
            diff = la.vsub(self.linear_part[k2], self.linear_part[k1])
            gens = [self.fan.rays[i] for i in wall]
            normal = _wall_normal(gens, self.fan.rank)
            probe = next(self.fan.rays[i] for i in k2 - wall)
            if la.dot(normal, probe) < 0:
                normal = la.vscale(-1, normal)
            coef = _multiple_of(diff, normal)
            out[wall] = coef
        return out


def _wall_normal(gens, rank):
    if not gens:
        return la.primitive((1,)) if rank == 1 else None
    ker = la.integer_kernel(gens, rank)
    if len(ker) != 1:
        raise GeometryError("wall is not of codimension one")
    return la.primitive(ker[0])


def _multiple_of(v, base):
    idx = next(i for i, b in enumerate(base) if b != 0)
    c = Fraction(v[idx]) / Fraction(base[idx])
    if la.vscale(c, base) != la.vec(v):
        raise GeometryError("slope jump is not normal to the wall")
    return la._norm(c)


def eval_pl(f: PLFunction, x):
    x = la.vec(x)
    if not any(x):
        return 0
    cones = f.fan.containing(x)
    if not cones:
        raise GeometryError(f"point {x} outside the support of the fan")
    return la.dot(f.linear_part[cones[0]], x)


def is_convex(f: PLFunction, strict: bool = False) -> bool:
    if not f.fan.is_complete:
        raise GeometryError("convexity test needs a complete fan")
    for wall, (k1, k2) in f.fan.walls().items():
        for a, b in ((k1, k2), (k2, k1)):
            for i in b - wall:
                v = f.fan.rays[i]
                own = la.dot(f.linear_part[b], v)
                other = la.dot(f.linear_part[a], v)
                if own < other or (strict and own == other):
                    return False
    return True


def is_strictly_convex(f: PLFunction) -> bool:
    return is_convex(f, strict=True)


def newton_polytope(f: PLFunction) -> LatticePolytope:
    """``{n : <m, n> >= -f(m) for all m}``; vertices are the negated covectors."""
    if not is_convex(f):
        raise GeometryError("Newton polytope undefined for a non-convex function")
    rays = list(f.fan.rays)
    vals = f.ray_values()
    if f.fan.rank == 0:
        return LatticePolytope([()], rank=0)
    return LatticePolytope.from_inequalities(rays, vals)


def quotient_projection(fan: Fan, cone: frozenset) -> tuple:
    """Integer matrix whose rows span the covectors vanishing on the cone."""
    gens = [fan.rays[i] for i in cone]
    if not gens:
        return la.identity(fan.rank)
    return la.mat(la.integer_kernel(gens, fan.rank))


def quotient_fan(fan: Fan, cone) -> Fan:
    """Fan of images ``(C + R K) / R K`` of the cones ``C`` containing ``K``."""
    cone = frozenset(cone)
    if cone not in fan.cones:
        raise GeometryError("cone is not a cone of the fan")
    proj = quotient_projection(fan, cone)
    new_rank = len(proj)
    rays: list[tuple] = []
    cones = []
    for c in fan.cones:
        if not cone <= c:
            continue
        idx = []
        for i in sorted(c - cone):
            img = la.primitive(la.matvec(proj, fan.rays[i]))
            if not any(img):
                continue
            if img not in rays:
                rays.append(img)
            idx.append(rays.index(img))
        cones.append(frozenset(idx))
    return Fan(new_rank, rays, cones)


def quotient_function(f: PLFunction, cone: frozenset) -> tuple[Fan, PLFunction]:
    """The PL function induced on the quotient fan after subtracting a linear
    piece that vanishes along the cone."""
    qfan = quotient_fan(f.fan, cone)
    proj = quotient_projection(f.fan, cone)
    base = f.linear_part[next(m for m in f.fan.maximal_cones if cone <= m)]
    section = la.integer_right_inverse(proj)
    pieces = {}
    for m in f.fan.maximal_cones:
        if not cone <= m:
            continue
        diff = la.vsub(f.linear_part[m], base)
        cov = la.matvec(la.transpose(section), diff)
        img = frozenset(qfan.rays.index(la.primitive(la.matvec(proj, f.fan.rays[i])))
                        for i in m - cone if any(la.matvec(proj, f.fan.rays[i])))
        pieces[img] = cov
    return qfan, PLFunction(qfan, pieces)


# ---------------------------------------------------------------------------
# text format


def dumps_plfunction(f: PLFunction) -> str:
    fan = f.fan
    lines = [f"plfun rank={fan.rank} rays={len(fan.rays)} cones={len(fan.maximal_cones)}"]
    for r in fan.rays:
        lines.append("ray " + " ".join(map(str, r)))
    for m in fan.maximal_cones:
        lines.append("cone " + " ".join(map(str, sorted(m))) + " : " + " ".join(map(str, f.linear_part[m])))
    return "\n".join(lines) + "\n"


def loads_plfunction(text: str) -> PLFunction:
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    head = dict(t.split("=") for t in lines[0].split()[1:])
    rank = int(head["rank"])
    rays = [tuple(int(x) for x in ln.split()[1:]) for ln in lines if ln.startswith("ray ")]
    pieces = {}
    for ln in lines:
        if ln.startswith("cone "):
            lhs, rhs = ln[5:].split(":")
            pieces[frozenset(int(x) for x in lhs.split())] = tuple(Fraction(x) for x in rhs.split())
    fan = Fan(rank, rays, pieces.keys())
    return PLFunction(fan, pieces)

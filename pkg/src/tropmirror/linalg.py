"""Exact integer / rational linear algebra on nested tuples.

Matrices are sequences of rows.  Everything here works over ``int`` and
``fractions.Fraction``; nothing is converted to floating point.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence

Vector = tuple
Matrix = tuple


def vec(v) -> tuple:
    return tuple(_norm(x) for x in v)


def mat(m) -> tuple:
    return tuple(tuple(_norm(x) for x in row) for row in m)


def _norm(x):
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else x
    if isinstance(x, int):
        return x
    return _norm(Fraction(x))


def identity(n: int) -> tuple:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def transpose(m) -> tuple:
    return tuple(zip(*m)) if m else ()


def dot(u, v):
    return _norm(sum((a * b for a, b in zip(u, v)), 0))


def matmul(a, b) -> tuple:
    bt = transpose(b)
    return tuple(tuple(dot(row, col) for col in bt) for row in a)


def matvec(a, v) -> tuple:
    return tuple(dot(row, v) for row in a)


def vadd(u, v) -> tuple:
    return tuple(_norm(a + b) for a, b in zip(u, v))


def vsub(u, v) -> tuple:
    return tuple(_norm(a - b) for a, b in zip(u, v))


def vscale(c, v) -> tuple:
    return tuple(_norm(c * a) for a in v)


def is_integral(v) -> bool:
    return all(isinstance(x, int) or Fraction(x).denominator == 1 for x in v)


def primitive(v) -> tuple:
    """Smallest positive integer multiple direction of a rational vector."""
    fr = [Fraction(x) for x in v]
    den = 1
    for x in fr:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in fr]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g == 0:
        return tuple(ints)
    return tuple(x // g for x in ints)


def rref(m) -> tuple[list[list[Fraction]], list[int]]:
    rows = [[Fraction(x) for x in row] for row in m]
    if not rows:
        return rows, []
    ncols = len(rows[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        p = rows[r][c]
        rows[r] = [x / p for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows, pivots


def rank(m) -> int:
    if not m or not len(m[0]):
        return 0
    return len(rref(m)[1])


def nullspace(m, ncols: int | None = None) -> list[tuple]:
    """Rational basis of {x : m x = 0}."""
    if not m:
        n = ncols or 0
        return [tuple(1 if i == j else 0 for j in range(n)) for i in range(n)]
    rows, pivots = rref(m)
    n = len(rows[0])
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * n
        x[f] = Fraction(1)
        for i, p in enumerate(pivots):
            x[p] = -rows[i][f]
        basis.append(vec(x))
    return basis


def solve(a, b):
    """Solve ``a x = b``; returns one solution or ``None`` if inconsistent."""
    if not a:
        return None
    n = len(a[0])
    aug = [list(row) + [bi] for row, bi in zip(a, b)]
    rows, pivots = rref(aug)
    if n in pivots:
        return None
    x = [Fraction(0)] * n
    for i, p in enumerate(pivots):
        x[p] = rows[i][n]
    return vec(x)


def det(m):
    n = len(m)
    if n == 0:
        return 1
    rows = [[Fraction(x) for x in row] for row in m]
    d = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if rows[i][c] != 0), None)
        if piv is None:
            return 0
        if piv != c:
            rows[c], rows[piv] = rows[piv], rows[c]
            d = -d
        p = rows[c][c]
        d *= p
        for i in range(c + 1, n):
            if rows[i][c] != 0:
                f = rows[i][c] / p
                rows[i] = [a - f * bb for a, bb in zip(rows[i], rows[c])]
    return _norm(d)


def inverse(m) -> tuple:
    n = len(m)
    aug = [list(row) + [1 if i == j else 0 for j in range(n)] for i, row in enumerate(m)]
    rows, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return mat(row[n:] for row in rows)


def is_unimodular(m) -> bool:
    return all(is_integral(row) for row in m) and det(m) in (1, -1)


def _column_echelon(m) -> tuple[list[list[int]], list[list[int]], int]:
    """Unimodular column reduction: returns (M U, U, number of pivot columns)."""
    a = [list(map(int, row)) for row in m]
    nrows = len(a)
    ncols = len(a[0]) if a else 0
    u = [[1 if i == j else 0 for j in range(ncols)] for i in range(ncols)]

    def colop(dst, src, f):
        for row in a:
            row[dst] += f * row[src]
        for row in u:
            row[dst] += f * row[src]

    def swap(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in u:
            row[i], row[j] = row[j], row[i]

    p = 0
    for r in range(nrows):
        if p >= ncols:
            break
        while True:
            nz = [c for c in range(p, ncols) if a[r][c] != 0]
            if not nz:
                break
            c0 = min(nz, key=lambda c: abs(a[r][c]))
            if c0 != p:
                swap(c0, p)
            done = True
            for c in range(p + 1, ncols):
                if a[r][c] != 0:
                    colop(c, p, -(a[r][c] // a[r][p]))
                    if a[r][c] != 0:
                        done = False
            if done:
                break
        if any(a[r][c] != 0 for c in range(p, ncols)):
            p += 1
    return a, u, p


def integer_kernel(m, ncols: int | None = None) -> list[tuple]:
    """Basis of the saturated lattice ``ker(m) ∩ Z^n`` (m integral)."""
    if not m:
        n = ncols or 0
        return [tuple(1 if i == j else 0 for j in range(n)) for i in range(n)]
    _, u, p = _column_echelon(m)
    n = len(u)
    return [tuple(u[i][c] for i in range(n)) for c in range(p, n)]


def saturated_span(vectors: Sequence[Sequence], n: int) -> list[tuple]:
    """Basis of ``span_Q(vectors) ∩ Z^n``."""
    vs = [primitive(v) for v in vectors if any(v)]
    if not vs:
        return []
    comp = integer_kernel(vs, n)
    if not comp:
        return [tuple(1 if i == j else 0 for j in range(n)) for i in range(n)]
    return integer_kernel(comp, n)


def unimodular_with_first_row(f) -> tuple:
    """Unimodular integer matrix whose first row is the primitive covector ``f``."""
    f = tuple(int(x) for x in f)
    n = len(f)
    _, u, p = _column_echelon([f])
    # f U = (±1, 0, ..., 0), so f = (±1, 0...) U^{-1}
    uinv = inverse(u)
    sign = 1 if dot(f, [row[0] for row in u]) == 1 else -1
    rows = [tuple(sign * x for x in uinv[0])] + [uinv[i] for i in range(1, n)]
    return mat(rows)


def unimodular_with_first_column(v) -> tuple:
    """Unimodular integer matrix whose first column is the primitive vector ``v``."""
    return transpose(unimodular_with_first_row(v))


def quotient_projection(v) -> tuple[tuple, tuple]:
    """Integer ``P`` ((n-1) x n) with kernel Zv and section ``S`` with P S = I."""
    q = unimodular_with_first_column(v)  # columns: v, b2, ..., bn
    qinv = inverse(q)
    proj = qinv[1:]
    sect = transpose(transpose(q)[1:])
    return mat(proj), mat(sect)


def gcd_of_minors(m, k: int) -> int:
    """gcd of all k x k minors of an integer matrix (rows x cols)."""
    from itertools import combinations

    rows = len(m)
    cols = len(m[0]) if m else 0
    g = 0
    for rs in combinations(range(rows), k):
        for cs in combinations(range(cols), k):
            g = gcd(g, int(det([[m[r][c] for c in cs] for r in rs])))
    return g


def integer_right_inverse(m) -> tuple:
    """Integer ``S`` with ``m S = I`` for an integer matrix with saturated row lattice."""
    k = len(m)
    red, u, p = _column_echelon(m)
    if p != k:
        raise ValueError("rows are linearly dependent")
    head = [row[:k] for row in red]
    if det(head) not in (1, -1):
        raise ValueError("row lattice is not saturated")
    hinv = inverse(head)
    ucols = [row[:k] for row in u]
    out = matmul(ucols, hinv)
    return out

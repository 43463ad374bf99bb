"""Numerical Legendre transforms of convex potentials and Hessian-metric checks.

Potentials are expression trees in prefix notation over the coordinates
``y1 .. yn``.  Values, gradients and Hessians of expression potentials are
evaluated from symbolic derivatives; the checks themselves use central finite
differences on the sample grid, so their errors scale like ``h**2``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

NEWTON_MAX_ITER = 100
NEWTON_TOL = 1e-12

# ---------------------------------------------------------------------------
# expression trees

Expr = tuple  # ("num", float) | ("var", index) | (op, *children)

_BINARY = {"+", "-", "*", "/", "^"}
_UNARY = {"exp", "log", "neg"}


class ExpressionError(ValueError):
    pass


def num(x) -> Expr:
    return ("num", float(x))


def var(i: int) -> Expr:
    return ("var", i)


def parse_expression(text: str, dim: int | None = None) -> Expr:
    tokens = text.split()
    pos = 0

    def take() -> Expr:
        nonlocal pos
        if pos >= len(tokens):
            raise ExpressionError("unexpected end of expression")
        tok = tokens[pos]
        pos += 1
        if tok in _BINARY:
            a = take()
            b = take()
            return (tok, a, b)
        if tok in _UNARY:
            return (tok, take())
        if tok.startswith("y") and tok[1:].isdigit():
            i = int(tok[1:]) - 1
            if i < 0 or (dim is not None and i >= dim):
                raise ExpressionError(f"coordinate {tok} out of range")
            return ("var", i)
        try:
            return ("num", float(Fraction(tok)))
        except (ValueError, ZeroDivisionError):
            raise ExpressionError(f"bad token {tok!r}") from None

    expr = take()
    if pos != len(tokens):
        raise ExpressionError("trailing tokens in expression")
    return expr


def format_expression(e: Expr) -> str:
    kind = e[0]
    if kind == "num":
        return repr(e[1])
    if kind == "var":
        return f"y{e[1] + 1}"
    return " ".join([kind] + [format_expression(c) for c in e[1:]])


def evaluate(e: Expr, points: np.ndarray) -> np.ndarray:
    """Evaluate on an array of points of shape (count, dim)."""
    kind = e[0]
    if kind == "num":
        return np.full(points.shape[0], e[1])
    if kind == "var":
        return points[:, e[1]].astype(float)
    args = [evaluate(c, points) for c in e[1:]]
    with np.errstate(all="ignore"):
        if kind == "+":
            return args[0] + args[1]
        if kind == "-":
            return args[0] - args[1]
        if kind == "*":
            return args[0] * args[1]
        if kind == "/":
            return args[0] / args[1]
        if kind == "^":
            return np.power(args[0], args[1])
        if kind == "exp":
            return np.exp(args[0])
        if kind == "log":
            return np.log(args[0])
        if kind == "neg":
            return -args[0]
    raise ExpressionError(f"unknown operator {kind}")


def _is_num(e, value=None):
    return e[0] == "num" and (value is None or e[1] == value)


def _mk(op, *args) -> Expr:
    # light constant folding keeps derivative trees small
    if all(_is_num(a) for a in args):
        return ("num", float(evaluate((op, *args), np.zeros((1, 1)))[0]))
    if op == "+":
        a, b = args
        if _is_num(a, 0.0):
            return b
        if _is_num(b, 0.0):
            return a
    elif op == "-":
        a, b = args
        if _is_num(b, 0.0):
            return a
        if _is_num(a, 0.0):
            return _mk("neg", b)
    elif op == "*":
        a, b = args
        if _is_num(a, 0.0) or _is_num(b, 0.0):
            return ("num", 0.0)
        if _is_num(a, 1.0):
            return b
        if _is_num(b, 1.0):
            return a
    elif op == "/":
        a, b = args
        if _is_num(a, 0.0):
            return ("num", 0.0)
        if _is_num(b, 1.0):
            return a
    elif op == "^":
        a, b = args
        if _is_num(b, 1.0):
            return a
        if _is_num(b, 0.0):
            return ("num", 1.0)
    return (op, *args)


def derivative(e: Expr, i: int) -> Expr:
    kind = e[0]
    if kind == "num":
        return ("num", 0.0)
    if kind == "var":
        return ("num", 1.0 if e[1] == i else 0.0)
    if kind in ("+", "-"):
        return _mk(kind, derivative(e[1], i), derivative(e[2], i))
    if kind == "neg":
        return _mk("neg", derivative(e[1], i))
    if kind == "*":
        a, b = e[1], e[2]
        return _mk("+", _mk("*", derivative(a, i), b), _mk("*", a, derivative(b, i)))
    if kind == "/":
        a, b = e[1], e[2]
        top = _mk("-", _mk("*", derivative(a, i), b), _mk("*", a, derivative(b, i)))
        return _mk("/", top, _mk("^", b, ("num", 2.0)))
    if kind == "exp":
        return _mk("*", e, derivative(e[1], i))
    if kind == "log":
        return _mk("/", derivative(e[1], i), e[1])
    if kind == "^":
        a, b = e[1], e[2]
        if _is_num(b):
            c = b[1]
            return _mk("*", _mk("*", ("num", c), _mk("^", a, ("num", c - 1))), derivative(a, i))
        # a^b = exp(b log a)
        inner = _mk("+", _mk("*", derivative(b, i), _mk("log", a)), _mk("/", _mk("*", b, derivative(a, i)), a))
        return _mk("*", e, inner)
    raise ExpressionError(f"unknown operator {kind}")


# ---------------------------------------------------------------------------
# potentials


@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple

    def __post_init__(self):
        if len(self.lo) != len(self.hi) or any(a >= b for a, b in zip(self.lo, self.hi)):
            raise ValueError("box needs lo < hi on every axis")

    @property
    def dim(self) -> int:
        return len(self.lo)

    def spacing(self, resolution: int) -> np.ndarray:
        return (np.array(self.hi, float) - np.array(self.lo, float)) / resolution

    def grid(self, resolution: int, interior: bool = False) -> np.ndarray:
        axes = []
        for a, b in zip(self.lo, self.hi):
            pts = np.linspace(float(a), float(b), resolution + 1)
            axes.append(pts[1:-1] if interior else pts)
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


class Potential:
    """A scalar function on a box, sampled on a regular grid."""

    dim: int
    box: Box
    grid_resolution: int

    def value(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def gradient(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def hessian(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def value_or_nan(self, points: np.ndarray) -> np.ndarray:
        return self.value(points)

    def sample_points(self, interior: bool = True) -> np.ndarray:
        return self.box.grid(self.grid_resolution, interior=interior)

    def __call__(self, points) -> np.ndarray:
        return self.value(np.atleast_2d(np.asarray(points, float)))


@dataclass
class ExpressionPotential(Potential):
    expr: Expr
    box: Box
    grid_resolution: int = 32
    _grad: list = field(init=False, repr=False)
    _hess: list = field(init=False, repr=False)

    def __post_init__(self):
        n = self.box.dim
        self._grad = [derivative(self.expr, i) for i in range(n)]
        self._hess = [[derivative(g, j) for j in range(n)] for g in self._grad]
        if self.grid_resolution < 2:
            raise ValueError("grid resolution must be at least 2")

    @property
    def dim(self) -> int:
        return self.box.dim

    def value(self, points):
        return evaluate(self.expr, points)

    def gradient(self, points):
        return np.stack([evaluate(g, points) for g in self._grad], axis=1)

    def hessian(self, points):
        n = self.dim
        out = np.empty((points.shape[0], n, n))
        for i in range(n):
            for j in range(n):
                out[:, i, j] = evaluate(self._hess[i][j], points)
        return out


class LegendreTransformed(Potential):
    """Ǩ(ў) = <ў, y> - K(y) where y solves grad K(y) = ў."""

    def __init__(self, base: Potential, box: Box, grid_resolution: int):
        self.base = base
        self.box = box
        self.grid_resolution = grid_resolution
        self.dim = base.dim

    def preimage(self, points: np.ndarray, strict: bool = True) -> np.ndarray:
        centre = (np.array(self.base.box.lo, float) + np.array(self.base.box.hi, float)) / 2
        return invert_gradient(self.base, points, np.tile(centre, (len(points), 1)), strict)

    def value(self, points):
        y = self.preimage(points)
        return np.einsum("ij,ij->i", points, y) - self.base.value(y)

    def value_or_nan(self, points):
        y = self.preimage(points, strict=False)
        return np.einsum("ij,ij->i", points, y) - self.base.value_or_nan(y)

    def gradient(self, points):
        return self.preimage(points)

    def hessian(self, points):
        return np.linalg.inv(self.base.hessian(self.preimage(points)))


class NewtonFailure(ArithmeticError):
    pass


def invert_gradient(potential: Potential, targets: np.ndarray, start: np.ndarray, strict: bool = True) -> np.ndarray:
    """Solve grad K(y) = target for each row by damped Newton with Armijo backtracking.

    Minimises the convex function K(y) - <target, y>.  With ``strict`` a
    NewtonFailure names the first query point that did not converge;
    otherwise such rows come back as NaN.
    """
    targets = np.asarray(targets, float)
    y = np.array(start, float)
    active = np.ones(len(y), bool)
    failed = np.zeros(len(y), bool)
    scale = np.maximum(1.0, np.abs(targets).max(axis=1))
    for _ in range(NEWTON_MAX_ITER):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        ya, ta = y[idx], targets[idx]
        resid = potential.gradient(ya) - ta
        done = np.abs(resid).max(axis=1) <= NEWTON_TOL * scale[idx]
        active[idx[done]] = False
        keep = ~done
        idx, ya, ta, resid = idx[keep], ya[keep], ta[keep], resid[keep]
        if idx.size == 0:
            break
        hess = potential.hessian(ya)
        good = np.all(np.isfinite(hess), axis=(1, 2)) & np.all(np.isfinite(resid), axis=1)
        good[good] = np.abs(np.linalg.det(hess[good])) > 1e-300
        if not good.all():
            failed[idx[~good]] = True
            active[idx[~good]] = False
            idx, ya, ta, resid, hess = idx[good], ya[good], ta[good], resid[good], hess[good]
            if idx.size == 0:
                break
        step = -np.linalg.solve(hess, resid[..., None])[..., 0]
        obj = potential.value_or_nan(ya) - np.einsum("ij,ij->i", ta, ya)
        slope = np.einsum("ij,ij->i", resid, step)
        t = np.ones(len(idx))
        pending = np.ones(len(idx), bool)
        for _ in range(60):
            trial = ya + t[:, None] * step
            new_obj = potential.value_or_nan(trial) - np.einsum("ij,ij->i", ta, trial)
            armijo = new_obj <= obj + 1e-4 * t * slope
            # below roundoff the decrease test is meaningless; take the Newton step
            tiny = np.abs(slope) <= 1e-13 * (1 + np.abs(obj))
            ok = np.isfinite(new_obj) & (armijo | tiny)
            pending &= ~ok
            if not pending.any():
                break
            t = np.where(pending, t / 2, t)
        y[idx] = ya + t[:, None] * step
    failed |= active
    if failed.any():
        if strict:
            point = targets[np.argmax(failed)].tolist()
            raise NewtonFailure(f"gradient inversion did not converge at {point}")
        y[failed] = np.nan
    return y


def legendre_transform(potential: Potential) -> LegendreTransformed:
    """Ǩ on the bounding box of the gradient image of the sample grid."""
    grid = potential.sample_points(interior=False)
    image = potential.gradient(grid)
    if not np.all(np.isfinite(image)):
        raise NewtonFailure("gradient is not finite on the sample grid")
    box = Box(tuple(image.min(axis=0)), tuple(image.max(axis=0)))
    return LegendreTransformed(potential, box, potential.grid_resolution)


# ---------------------------------------------------------------------------
# finite differences


def fd_gradient(potential: Potential, points: np.ndarray, step: np.ndarray) -> np.ndarray:
    n = points.shape[1]
    out = np.empty_like(points, dtype=float)
    for i in range(n):
        e = np.zeros(n)
        e[i] = step[i]
        out[:, i] = (potential.value(points + e) - potential.value(points - e)) / (2 * step[i])
    return out


def fd_hessian(potential: Potential, points: np.ndarray, step: np.ndarray) -> np.ndarray:
    n = points.shape[1]
    out = np.empty((points.shape[0], n, n))
    centre = potential.value(points)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = step[i]
        out[:, i, i] = (potential.value(points + ei) - 2 * centre + potential.value(points - ei)) / step[i] ** 2
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = step[j]
            mixed = (
                potential.value(points + ei + ej)
                - potential.value(points + ei - ej)
                - potential.value(points - ei + ej)
                + potential.value(points - ei - ej)
            ) / (4 * step[i] * step[j])
            out[:, i, j] = out[:, j, i] = mixed
    return out


def grid_hessians(potential: Potential) -> np.ndarray:
    pts = potential.sample_points(interior=True)
    return fd_hessian(potential, pts, potential.box.spacing(potential.grid_resolution))


def is_positive_definite(potential: Potential, tol: float = 1e-10) -> bool:
    hess = grid_hessians(potential)
    return bool(np.all(np.linalg.eigvalsh(hess) > tol))


def monge_ampere_residual(potential: Potential) -> float:
    """max |det Hess K - mean det| over interior grid points."""
    dets = np.linalg.det(grid_hessians(potential))
    return float(np.max(np.abs(dets - dets.mean())))


@dataclass(frozen=True)
class DualityReport:
    hessian_deviation: float
    gradient_deviation: float

    @property
    def max(self) -> float:
        return max(self.hessian_deviation, self.gradient_deviation)


def hessian_duality_check(potential: Potential, sample_stride: int = 1) -> DualityReport:
    """Compare the finite-difference Hessian and gradient of Ǩ at ў = grad K(y)
    with (Hess K(y))^-1 and y respectively."""
    dual = legendre_transform(potential)
    pts = potential.sample_points(interior=True)[::sample_stride]
    images = potential.gradient(pts)
    step = dual.box.spacing(dual.grid_resolution)
    hess_dual = fd_hessian(dual, images, step)
    expected = np.linalg.inv(potential.hessian(pts))
    grad_dual = fd_gradient(dual, images, step)
    return DualityReport(
        float(np.max(np.abs(hess_dual - expected))),
        float(np.max(np.abs(grad_dual - pts))),
    )


def involution_error(potential: Potential, sample_stride: int = 1) -> float:
    """max |(K^vv)(y) - K(y)| over interior sample points."""
    dual = legendre_transform(potential)
    double = legendre_transform(dual)
    pts = potential.sample_points(interior=True)[::sample_stride]
    return float(np.max(np.abs(double.value(pts) - potential.value(pts))))


# ---------------------------------------------------------------------------
# text format


def loads_potential(text: str) -> ExpressionPotential:
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip() and not ln.strip().startswith("#")]
    if len(lines) != 2:
        raise ExpressionError("potential file needs a header line and one expression line")
    head = {}
    for tok in lines[0].split():
        key, _, val = tok.partition("=")
        head[key] = val
    try:
        dim = int(head["dim"])
        lo, hi = [], []
        for axis in head["box"].split(","):
            a, b = axis.split("..")
            lo.append(float(Fraction(a)))
            hi.append(float(Fraction(b)))
        grid = int(head.get("grid", 32))
    except (KeyError, ValueError) as exc:
        raise ExpressionError(f"bad potential header: {exc}") from None
    if len(lo) != dim:
        raise ExpressionError("box dimension does not match dim")
    return ExpressionPotential(parse_expression(lines[1], dim), Box(tuple(lo), tuple(hi)), grid)


def dumps_potential(p: ExpressionPotential) -> str:
    box = ",".join(f"{a!r}..{b!r}" for a, b in zip(p.box.lo, p.box.hi))
    return f"dim={p.dim} box={box} grid={p.grid_resolution}\n{format_expression(p.expr)}\n"


def sum_of_exponentials(dim: int, box: Box, grid: int = 64) -> ExpressionPotential:
    terms = [("exp", ("var", i)) for i in range(dim)]
    expr = terms[0]
    for t in terms[1:]:
        expr = ("+", expr, t)
    return ExpressionPotential(expr, box, grid)


def quadratic(matrix: Sequence[Sequence[float]], box: Box, grid: int = 32) -> ExpressionPotential:
    """K = y^T A y / 2."""
    n = len(matrix)
    expr: Expr = ("num", 0.0)
    for i, j in itertools.product(range(n), repeat=2):
        c = float(matrix[i][j]) / 2
        if c:
            expr = _mk("+", expr, _mk("*", ("num", c), _mk("*", ("var", i), ("var", j))))
    return ExpressionPotential(expr, box, grid)

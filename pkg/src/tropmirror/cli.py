"""Command line front end: every command reads files, runs one pipeline and
prints a JSON report.  Exit status 0 when all checks pass, 1 on a failed
mathematical check, 2 on unreadable input."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import batyrev, degen, legendre, semiflat, tropical
from . import affine_complex as ac
from .lattice import GeometryError, dual_polytope, is_reflexive, loads_polytope

SCHEMA_VERSION = ac.SCHEMA_VERSION


class InputError(Exception):
    """Input could not be read or parsed."""


@dataclass
class Job:
    command: str
    inputs: list[str]
    options: dict = field(default_factory=dict)
    out: str | None = None


# ---------------------------------------------------------------------------
# input


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _parse(path: str, loader):
    text = _read(path)
    try:
        return loader(text)
    except GeometryError:
        raise
    except (ValueError, KeyError, TypeError, IndexError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _json(path: str) -> dict:
    return _parse(path, json.loads)


def _polytope(path: str):
    return _parse(path, loads_polytope)


def _complex(path: str, job: Job) -> ac.AffineComplex:
    data = _json(path)
    try:
        cx = ac.complex_from_json(data)
    except GeometryError:
        raise
    except (ValueError, KeyError, TypeError, IndexError) as exc:
        raise InputError(f"{path}: {exc}") from None
    if job.options.get("extend_across_facets") and not cx.extend_across_facets:
        cx = ac.extend_across_facets(cx)
    return cx


def _vectors(rows) -> list[tuple]:
    return [tuple(Fraction(x) for x in r) for r in rows]


def _num(x):
    x = Fraction(x)
    return int(x) if x.denominator == 1 else str(x)


def _vec(v) -> list:
    return [_num(x) for x in v]


def _need(job: Job, k: int):
    if len(job.inputs) < k:
        raise InputError(f"{job.command} needs {k} input file(s)")


# ---------------------------------------------------------------------------
# commands; each returns (report, ok)


def cmd_dualize(job: Job):
    _need(job, 1)
    p = _polytope(job.inputs[0])
    d = dual_polytope(p)
    return {"vertices": [_vec(v) for v in d.vertices], "is_lattice": d.is_lattice}, True


def cmd_reflexive(job: Job):
    _need(job, 1)
    ok = is_reflexive(_polytope(job.inputs[0]))
    return {"reflexive": ok}, ok


def _batyrev_input(path: str) -> batyrev.BatyrevInput:
    data = _json(path)
    try:
        return batyrev.input_from_json(data)
    except GeometryError:
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from None


def cmd_build_b(job: Job):
    _need(job, 1)
    inp = _batyrev_input(job.inputs[0])
    cx = batyrev.build_B(inp, extend_across_facets=bool(job.options.get("extend_across_facets")))
    return {"complex": cx.to_json(), "f_vector": list(cx.f_vector()), "closed": cx.is_closed}, True


def cmd_discriminant(job: Job):
    _need(job, 1)
    cx = _complex(job.inputs[0], job)
    disc = ac.discriminant_locus(cx)
    return {
        "flags": [{"faces": list(f.faces), "cells": list(f.cells)} for f in disc.flags],
        "simplices": len(disc.simplices()),
        "trivalent_nodes": disc.trivalent_nodes(),
        "empty": disc.empty,
    }, True


def _matrix(m) -> list:
    return [_vec(r) for r in m]


def cmd_monodromy(job: Job):
    _need(job, 1)
    cx = _complex(job.inputs[0], job)
    if len(job.inputs) > 1:
        seq = _json(job.inputs[1]).get("sequence")
        if not isinstance(seq, list):
            raise InputError("loop file needs a 'sequence' list")
        loop = ac.loop_from_sequence(cx, seq)
        return {"matrix": _matrix(ac.parallel_transport(cx, loop))}, True
    return {"flags": [{"faces": list(f.faces), "matrix": _matrix(f.monodromy)} for f in cx.gamma]}, True


def cmd_classify(job: Job):
    _need(job, 1)
    cx = _complex(job.inputs[0], job)
    disc = ac.discriminant_locus(cx)
    types, unknown = {}, []
    for node in disc.trivalent_nodes():
        try:
            types[str(node)] = ac.classify_vertex(cx, node)
        except ac.UnknownVertexType as exc:
            unknown.append({"node": node, "error": str(exc)})
    report = {"vertex_types": types, "unknown": unknown}
    if cx.dim == 3:
        ec = ac.euler_count(cx)
        report.update(positive=ec.positives, negative=ec.negatives, euler=ec.chi)
    return report, not unknown


def _phi(cx: ac.AffineComplex, job: Job) -> legendre.MPLFunction:
    spec = job.options.get("function") or "cone"
    if spec == "cone":
        return legendre.cone_mpl(cx)
    if spec == "alcoved":
        return legendre.cone_mpl(cx, legendre.alcoved_height())
    data = _json(spec)
    return legendre.MPLFunction.from_kinks(cx, {int(k): Fraction(v) for k, v in data["kinks"].items()})


def cmd_legendre(job: Job):
    _need(job, 1)
    cx = _complex(job.inputs[0], job)
    dual = legendre.discrete_legendre(cx, _phi(cx, job))
    return {"complex": dual.complex.to_json(), "f_vector": list(dual.complex.f_vector()),
            "kinks": {str(k): _num(v) for k, v in sorted(dual.function.kinks.items())}}, True


def cmd_dual_check(job: Job):
    """Involution of the discrete Legendre transform and Batyrev duality for a
    reflexive polytope with its face decomposition."""
    _need(job, 1)
    inp = _batyrev_input(job.inputs[0])
    cx = batyrev.build_B(inp)
    phi = legendre.cone_mpl(cx)
    dual = legendre.discrete_legendre(cx, phi)
    double = legendre.discrete_legendre(dual.complex, dual.function)
    involution, _ = legendre.complexes_isomorphic(cx, double.complex, phi, double.function)
    mirror = batyrev.build_B(batyrev.BatyrevInput(inp.nabla))
    mirror_phi = legendre.cone_mpl(mirror)
    duality, _ = legendre.complexes_isomorphic(dual.complex, mirror, dual.function, mirror_phi)
    return {"involution": involution, "batyrev_duality": duality}, involution and duality


def cmd_strata(job: Job):
    _need(job, 1)
    cx = _complex(job.inputs[0], job)
    picture = job.options.get("picture") or "fan"
    poset = degen.fan_picture_strata(cx) if picture == "fan" else degen.cone_picture_strata(cx)
    report = poset.to_json()
    report["counts"] = {str(k): v for k, v in poset.counts().items()}
    report["components"] = len(poset.components())
    return report, True


def cmd_ghost(job: Job):
    _need(job, 1)
    data = _json(job.inputs[0])
    try:
        sigma, tau = _vectors(data["sigma"]), _vectors(data.get("tau", []))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"ghost file: {exc}") from None
    rank = len(sigma[0]) if sigma else 0
    if not tau:
        tau = [tuple([0] * rank)]
    return degen.ghost_stalk(sigma, tau).to_json(), True


def cmd_slice(job: Job):
    _need(job, 1)
    p = _polytope(job.inputs[0])
    try:
        c = Fraction(job.options.get("c") or "1/4")
    except ValueError as exc:
        raise InputError(f"bad value for --c: {exc}") from None
    s = degen.local_model_slice(p, c)
    return {
        "c": str(c),
        "inequalities": [{"normal": _vec(n), "offset": _num(o)} for n, o in zip(s.normals, s.offsets)],
        "vertices": [_vec(v) for v in s.polytope.vertices] if s.polytope is not None else [],
        "empty": s.polytope is None,
    }, True


def cmd_positivity(job: Job):
    _need(job, 1)
    report = degen.positivity_2d(_complex(job.inputs[0], job))
    return report.to_json(), report.positive


def cmd_tropical_validate(job: Job):
    _need(job, 2)
    curve = _parse(job.inputs[0], tropical.loads_curve)
    cx = _complex(job.inputs[1], job)
    report = tropical.validate(curve, cx, job.options.get("gamma_rule") or "literal")
    out = report.to_json()
    out["verdict"] = "balanced" if report.valid else "unbalanced"
    return out, report.valid


def cmd_cohomology(job: Job):
    _need(job, 1)
    cx = _complex(job.inputs[0], job)
    degrees = job.options.get("degrees") or [0, 1]
    return {f"h{p}": ac.cohomology_i_star_lambda(cx, p) for p in degrees}, True


def cmd_semiflat_check(job: Job):
    _need(job, 1)
    pot = _parse(job.inputs[0], semiflat.loads_potential)
    tol = job.options.get("tolerance")
    tol_inv = 1e-6 if tol is None else tol
    tol_hess = 1e-5 if tol is None else tol
    inv = semiflat.involution_error(pot)
    dual = semiflat.hessian_duality_check(pot)
    ma = semiflat.monge_ampere_residual(pot)
    ok = inv <= tol_inv and dual.hessian_deviation <= tol_hess
    report = {"involution_error": inv, "hessian_inverse_error": dual.hessian_deviation,
              "gradient_error": dual.gradient_deviation, "monge_ampere_residual": ma,
              "tolerances": {"involution": tol_inv, "hessian": tol_hess}}
    if job.options.get("monge_ampere"):
        tol_ma = 1e-8 if tol is None else tol
        report["tolerances"]["monge_ampere"] = tol_ma
        ok = ok and ma <= tol_ma
    return report, ok


def cmd_hodge_oracle(job: Job):
    _need(job, 1)
    h11, h12 = batyrev.hodge_oracle(_polytope(job.inputs[0]))
    return {"h11": h11, "h12": h12, "euler": 2 * (h11 - h12)}, True


COMMANDS = {
    "dualize": cmd_dualize,
    "reflexive": cmd_reflexive,
    "build-b": cmd_build_b,
    "discriminant": cmd_discriminant,
    "monodromy": cmd_monodromy,
    "classify": cmd_classify,
    "legendre": cmd_legendre,
    "dual-check": cmd_dual_check,
    "strata": cmd_strata,
    "ghost": cmd_ghost,
    "slice": cmd_slice,
    "positivity": cmd_positivity,
    "tropical-validate": cmd_tropical_validate,
    "cohomology": cmd_cohomology,
    "semiflat-check": cmd_semiflat_check,
    "hodge-oracle": cmd_hodge_oracle,
}

# commands whose main product is a complex: --out receives the bare complex file
_COMPLEX_PRODUCTS = {"build-b", "legendre"}


def run(job: Job) -> tuple[int, dict]:
    """Run one job; returns (exit status, report)."""
    base = {"schema_version": SCHEMA_VERSION, "command": job.command}
    try:
        report, ok = COMMANDS[job.command](job)
    except InputError as exc:
        return 2, {**base, "status": "input-error", "error": str(exc)}
    except (GeometryError, semiflat.NewtonFailure, ArithmeticError) as exc:
        return 1, {**base, "status": "failed", "error": str(exc), "error_type": type(exc).__name__}
    return (0 if ok else 1), {**base, "status": "ok" if ok else "failed", **report}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tropmirror", description=__doc__.splitlines()[0])
    p.add_argument("--schema-version", action="store_true", help="print the report schema version and exit")
    sub = p.add_subparsers(dest="command")
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("inputs", nargs="*")
        s.add_argument("--out", help="write the output here instead of stdout")
        s.add_argument("--extend-across-facets", action="store_true")
        if name == "semiflat-check":
            s.add_argument("--tolerance", type=float)
            s.add_argument("--monge-ampere", action="store_true", help="also require a constant Hessian determinant")
        if name == "strata":
            s.add_argument("--picture", choices=["fan", "cone"], default="fan")
        if name == "slice":
            s.add_argument("--c", default="1/4", help="rational number in (0, 1)")
        if name == "legendre":
            s.add_argument("--function", default="cone",
                           help="'cone', 'alcoved' or a JSON file {\"kinks\": {wall: value}}")
        if name == "tropical-validate":
            s.add_argument("--gamma-rule", choices=sorted(tropical.GAMMA_RULES), default="literal")
        if name == "cohomology":
            s.add_argument("--degree", type=int, action="append", dest="degrees", choices=[0, 1])
    return p


def main(argv: list[str] | None = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    if args.schema_version:
        print(json.dumps({"schema_version": SCHEMA_VERSION}))
        return 0
    if not args.command:
        parser.print_usage(sys.stderr)
        return 2
    opts = {k: v for k, v in vars(args).items() if k not in ("command", "inputs", "out", "schema_version")}
    job = Job(args.command, list(args.inputs), opts, args.out)
    status, report = run(job)
    if job.out and status == 0 and job.command in _COMPLEX_PRODUCTS:
        text = json.dumps(report["complex"], indent=1, sort_keys=True)
    else:
        text = json.dumps(report, indent=1, sort_keys=True)
    if job.out:
        Path(job.out).write_text(text + "\n")
    else:
        print(text)
    return status


if __name__ == "__main__":
    sys.exit(main())

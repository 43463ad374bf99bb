"""End-to-end run on the quintic: build B, classify the trivalent vertices of
the discriminant, compare with the Hodge numbers and check the Legendre
duality on the face decomposition."""
from __future__ import annotations

import argparse
import json
import time
from dataclasses import asdict, dataclass

from tropmirror import batyrev, legendre
from tropmirror.affine_complex import cohomology_i_star_lambda, discriminant_locus, euler_count
from tropmirror.lattice import dual_polytope


@dataclass
class PipelineConfig:
    triangulated: bool = True
    extend_across_facets: bool = True
    check_duality: bool = True


def run(cfg: PipelineConfig) -> dict:
    out: dict = {"config": asdict(cfg)}
    t0 = time.perf_counter()
    cx = batyrev.build_B(batyrev.quintic_input(cfg.triangulated), extend_across_facets=cfg.extend_across_facets)
    out["f_vector"] = list(cx.f_vector())
    out["build_seconds"] = round(time.perf_counter() - t0, 2)

    disc = discriminant_locus(cx)
    out["gamma_flags"] = len(disc.flags)
    out["trivalent_nodes"] = len(disc.trivalent_nodes())
    if cx.gamma:
        count = euler_count(cx)
        out["positive"], out["negative"], out["euler_from_vertices"] = count.positives, count.negatives, count.chi
    h11, h12 = batyrev.hodge_oracle(batyrev.quintic_delta())
    out["h11"], out["h12"], out["euler_from_hodge"] = h11, h12, 2 * (h11 - h12)
    out["h0_i_star_lambda"] = cohomology_i_star_lambda(cx, 0)

    if cfg.check_duality:
        faces = batyrev.build_B(batyrev.quintic_input(False))
        phi = legendre.cone_mpl(faces)
        dual = legendre.discrete_legendre(faces, phi)
        mirror = batyrev.build_B(batyrev.BatyrevInput(dual_polytope(batyrev.quintic_delta())))
        out["batyrev_duality"] = legendre.complexes_isomorphic(
            dual.complex, mirror, dual.function, legendre.cone_mpl(mirror))[0]
        double = legendre.discrete_legendre(dual.complex, dual.function)
        out["legendre_involution"] = legendre.complexes_isomorphic(faces, double.complex, phi, double.function)[0]
    out["total_seconds"] = round(time.perf_counter() - t0, 2)
    return out


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--faces", action="store_true", help="use the face decomposition instead of the triangulation")
    p.add_argument("--no-extend", action="store_true", help="keep Gamma flags with trivial monodromy")
    p.add_argument("--skip-duality", action="store_true")
    args = p.parse_args()
    cfg = PipelineConfig(not args.faces, not args.no_extend, not args.skip_duality)
    print(json.dumps(run(cfg), indent=1))


if __name__ == "__main__":
    main()

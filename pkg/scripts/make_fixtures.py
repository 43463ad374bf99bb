"""Regenerate the small bundled fixtures in src/tropmirror/data."""
import json
from pathlib import Path

from tropmirror.affine_complex import dumps_complex, focus_focus_pair
from tropmirror.batyrev import quintic_delta
from tropmirror.lattice import dumps_polytope, enumerate_reflexive_polygons
from tropmirror.tropical import dumps_curve, focus_focus_leg, tropical_line

DATA = Path(__file__).resolve().parents[1] / "src" / "tropmirror" / "data"


def main():
    polys = enumerate_reflexive_polygons(3)
    (DATA / "reflexive_polygons.json").write_text(json.dumps(
        {"bound": 3, "polygons": [[list(map(int, v)) for v in p.vertices] for p in polys]}, indent=1) + "\n")
    (DATA / "quintic_delta.txt").write_text(dumps_polytope(quintic_delta()))
    (DATA / "focus_focus.json").write_text(dumps_complex(focus_focus_pair(1)) + "\n")
    line, plane = tropical_line()
    (DATA / "tropical_line.json").write_text(dumps_curve(line) + "\n")
    (DATA / "plane.json").write_text(dumps_complex(plane) + "\n")
    heavy, _ = tropical_line((2, 1, 1))
    (DATA / "tropical_line_weight2.json").write_text(dumps_curve(heavy) + "\n")
    for name, inv in (("leg_invariant", True), ("leg_transverse", False)):
        leg, _ = focus_focus_leg(inv)
        (DATA / f"{name}.json").write_text(dumps_curve(leg) + "\n")
    print(f"{len(polys)} reflexive polygons and fixtures written to {DATA}")


if __name__ == "__main__":
    main()

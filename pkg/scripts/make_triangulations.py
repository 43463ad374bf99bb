"""Write the bundled boundary triangulations of the dilated simplices.

The reflexive simplex dual to conv(e_1, ..., e_d, -e_1 - ... - e_d) is a copy of
(d + 1) times the standard d-simplex.  Its boundary carries the alcoved
(Freudenthal) triangulation into unit simplices; this script lists the
maximal boundary cells in the coordinates of the dual lattice.
"""
from __future__ import annotations

import argparse
import itertools
import json
from pathlib import Path

DATA = Path(__file__).resolve().parents[1] / "src" / "tropmirror" / "data"


def alcoved_boundary(d: int) -> list[list[tuple]]:
    k = d + 1
    # partial-sum coordinates 0 <= x_1 <= ... <= x_d <= k
    def inside(x):
        return 0 <= x[0] and all(a <= b for a, b in zip(x, x[1:])) and x[-1] <= k

    def on_boundary(face):
        # a common supporting hyperplane among x_1 = 0, x_i = x_{i+1}, x_d = k
        checks = [lambda x: x[0] == 0, lambda x: x[-1] == k]
        checks += [lambda x, i=i: x[i] == x[i + 1] for i in range(d - 1)]
        return any(all(c(x) for x in face) for c in checks)

    cells = set()
    for base in itertools.product(range(k + 1), repeat=d):
        for perm in itertools.permutations(range(d)):
            x = list(base)
            simplex = [tuple(x)]
            for i in perm:
                x[i] += 1
                simplex.append(tuple(x))
            if not all(inside(p) for p in simplex):
                continue
            for drop in range(d + 1):
                face = tuple(sorted(simplex[:drop] + simplex[drop + 1:]))
                if on_boundary(face):
                    cells.add(face)

    def to_dual(x):
        # a_i = x_i - x_{i-1}; the dual lattice point is (a_1 - 1, ..., a_d - 1)
        prev = (0,) + x[:-1]
        return tuple(b - a - 1 for a, b in zip(prev, x))

    return sorted(sorted(to_dual(p) for p in c) for c in cells)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=DATA)
    args = ap.parse_args(argv)
    for name, d in (("quartic", 3), ("quintic", 4)):
        cells = alcoved_boundary(d)
        path = args.out / f"{name}_triangulation.json"
        path.write_text(json.dumps({"rank": d, "cells": cells}) + "\n")
        print(f"{path.name}: {len(cells)} cells")


if __name__ == "__main__":
    main()

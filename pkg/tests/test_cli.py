import json
from importlib import resources

import pytest

from tropmirror import cli
from tropmirror.affine_complex import cycle_of_segments, dumps_complex, focus_focus_pair
from tropmirror.tropical import dumps_curve, focus_focus_leg

DATA = resources.files("tropmirror.data")


def data(name):
    return str(DATA.joinpath(name))


def run(capsys, *argv):
    status = cli.main([str(a) for a in argv])
    out = capsys.readouterr().out
    return status, (json.loads(out) if out.strip() else None)


@pytest.fixture
def circle(tmp_path):
    path = tmp_path / "c5.json"
    path.write_text(dumps_complex(cycle_of_segments(5)))
    return path


def test_schema_version(capsys):
    status, out = run(capsys, "--schema-version")
    assert status == 0 and out == {"schema_version": 1}


def test_dualize_quintic(capsys):
    status, out = run(capsys, "dualize", data("quintic_delta.txt"))
    assert status == 0 and out["schema_version"] == 1 and out["command"] == "dualize"
    assert sorted(map(tuple, out["vertices"])) == sorted(
        [(-1, -1, -1, -1), (-1, -1, -1, 4), (-1, -1, 4, -1), (-1, 4, -1, -1), (4, -1, -1, -1)])
    assert out["is_lattice"]


def test_reflexive_exit_codes(capsys, tmp_path):
    assert run(capsys, "reflexive", data("quintic_delta.txt"))[0] == 0
    p = tmp_path / "tri.txt"
    p.write_text("dim=2 count=3\n0 0\n1 0\n0 1\n")
    status, out = run(capsys, "reflexive", p)
    assert status == 1 and out["reflexive"] is False


def test_input_errors_exit_two(capsys, tmp_path):
    status, out = run(capsys, "dualize", tmp_path / "missing.txt")
    assert status == 2 and out["status"] == "input-error"
    bad = tmp_path / "bad.txt"
    bad.write_text("dim=2 count=3\n0 0\n")
    assert run(capsys, "dualize", bad)[0] == 2
    assert run(capsys, "dualize")[0] == 2
    assert cli.main(["no-such-command"]) == 2


def test_geometry_failure_exits_one(capsys, tmp_path):
    p = tmp_path / "corner.txt"
    p.write_text("dim=2 count=3\n0 0\n1 0\n0 1\n")
    status, out = run(capsys, "dualize", p)
    assert status == 1 and out["error_type"] == "GeometryError"


def test_build_b_writes_complex(capsys, tmp_path):
    spec = tmp_path / "quartic.json"
    spec.write_text(json.dumps({"delta": "quartic", "nabla_subdivision": "quartic"}))
    out_path = tmp_path / "b.json"
    status, _ = run(capsys, "build-b", spec, "--out", out_path)
    assert status == 0
    status, report = run(capsys, "positivity", out_path)
    assert status == 0 and len(report["points"]) == 24 and report["positive"]
    status, report = run(capsys, "discriminant", out_path, "--extend-across-facets")
    assert status == 0 and len(report["flags"]) == 24


def test_classify_quintic_faces(capsys, tmp_path):
    spec = tmp_path / "q.json"
    spec.write_text(json.dumps({"delta": "quintic"}))
    out_path = tmp_path / "b.json"
    assert run(capsys, "build-b", spec, "--out", out_path)[0] == 0
    status, report = run(capsys, "strata", out_path)
    assert status == 0 and report["counts"] == {"0": 5, "1": 10, "2": 10, "3": 5}
    status, report = run(capsys, "dual-check", spec)
    assert status == 0 and report["involution"] and report["batyrev_duality"]
    legendre_out = tmp_path / "dual.json"
    assert run(capsys, "legendre", out_path, "--out", legendre_out)[0] == 0
    status, report = run(capsys, "strata", legendre_out, "--picture", "cone")
    assert status == 0 and report["components"] == 5


def test_circle_commands(capsys, circle):
    status, report = run(capsys, "strata", circle)
    assert status == 0 and report["components"] == 5
    status, report = run(capsys, "cohomology", circle)
    assert (report["h0"], report["h1"]) == (1, 1)
    status, report = run(capsys, "cohomology", circle, "--degree", "1")
    assert report["h1"] == 1 and "h0" not in report


def test_monodromy_loop(capsys, tmp_path):
    cx = focus_focus_pair(2)
    path = tmp_path / "ff.json"
    path.write_text(dumps_complex(cx))
    status, report = run(capsys, "monodromy", path)
    assert status == 0 and len(report["flags"]) == 1
    loop = tmp_path / "loop.json"
    flag = cx.gamma[0]
    (a1, b1), (a2, b2) = flag.edge_corners
    v_a, v_b = cx.corner_vertex[(flag.cells[0], a1)], cx.corner_vertex[(flag.cells[0], b1)]
    loop.write_text(json.dumps({"sequence": [v_a, flag.cells[1], v_b, flag.cells[0]]}))
    status, report = run(capsys, "monodromy", path, loop)
    assert status == 0 and report["matrix"] == [list(r) for r in flag.monodromy]
    loop.write_text(json.dumps({"steps": []}))
    assert run(capsys, "monodromy", path, loop)[0] == 2


def test_ghost_and_slice(capsys, tmp_path):
    g = tmp_path / "g.json"
    g.write_text(json.dumps({"sigma": [[0, 0, 1], [1, 0, 1], [0, 1, 1], [1, 1, 1]],
                             "tau": [[0, 0, 1], [1, 0, 1], [0, 1, 1], [1, 1, 1]]}))
    status, report = run(capsys, "ghost", g)
    assert status == 0 and len(report["generators"]) == 4 and len(report["relations"]) == 1
    seg = tmp_path / "seg.txt"
    seg.write_text("dim=1 count=2\n0\n1\n")
    status, report = run(capsys, "slice", seg, "--c", "1/4")
    assert status == 0 and report["vertices"] == [["1/4"], ["3/4"]]
    assert run(capsys, "slice", seg, "--c", "abc")[0] == 2
    assert run(capsys, "slice", seg, "--c", "2")[0] == 1


def test_tropical_validate(capsys, tmp_path):
    for invariant, expected in ((True, 0), (False, 1)):
        curve, cx = focus_focus_leg(invariant)
        c, b = tmp_path / "curve.json", tmp_path / "b.json"
        c.write_text(dumps_curve(curve))
        b.write_text(dumps_complex(cx))
        status, report = run(capsys, "tropical-validate", c, b)
        assert status == expected
        assert report["verdict"] == ("balanced" if invariant else "unbalanced")
    status, report = run(capsys, "tropical-validate", data("tropical_line.json"), data("plane.json"))
    assert status == 0
    status, report = run(capsys, "tropical-validate", data("tropical_line_weight2.json"), data("plane.json"))
    assert status == 1 and report["vertices"][0]["deficit"] == [1, 0]
    status, _ = run(capsys, "tropical-validate", data("leg_invariant.json"), data("focus_focus.json"),
                    "--gamma-rule", "strict")
    assert status == 1


def test_semiflat_check(capsys, tmp_path):
    p = tmp_path / "k.txt"
    p.write_text("dim=2 box=-1/8..1/8,-1/8..1/8 grid=64\n+ exp y1 exp y2\n")
    status, report = run(capsys, "semiflat-check", p)
    assert status == 0 and report["involution_error"] <= 1e-6
    status, report = run(capsys, "semiflat-check", p, "--monge-ampere")
    assert status == 1
    q = tmp_path / "q.txt"
    q.write_text("dim=2 box=-1..1,-1..1 grid=32\n+ * 1 * y1 y1 * 0.5 * y2 y2\n")
    status, report = run(capsys, "semiflat-check", q, "--monge-ampere")
    assert status == 0 and report["monge_ampere_residual"] <= 1e-8
    bad = tmp_path / "bad.txt"
    bad.write_text("dim=2 box=0..1 grid=4\n+ y1\n")
    assert run(capsys, "semiflat-check", bad)[0] == 2


def test_hodge_oracle(capsys):
    status, report = run(capsys, "hodge-oracle", data("quintic_delta.txt"))
    assert status == 0 and (report["h11"], report["h12"], report["euler"]) == (101, 1, 200)


def test_legendre_needs_embedding(capsys, circle):
    status, report = run(capsys, "legendre", circle)
    assert status == 1 and "embedded" in report["error"]

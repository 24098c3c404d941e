import json

import pytest

from simpcoord.cli import main, run


def report(argv):
    status, text, _ = run(argv)
    return status, json.loads(text), text


def test_psi_example():
    status, doc, _ = report(["psi", "--surface", "punctured_torus", "--lengths", "0,0,0", "--h", "0"])
    assert status == 0 and doc["z"] == [1.0, 1.0, 1.0]


def test_invert_example():
    status, doc, _ = report(["invert", "--surface", "punctured_torus", "--target", "1,1,1", "--h", "0"])
    res = doc["result"]
    assert status == 0 and res["converged"] and res["residual"] <= 1e-10
    assert max(abs(v) for v in res["l"]) <= 1e-10


def test_polytope_example():
    status, doc, _ = report(["polytope", "--surface", "punctured_torus", "--z", "0,0,0", "--h", "0"])
    assert status == 1 and doc["report"]["member"] is False
    assert {"triangles": [0, 1, 0], "edges": [0, 1]} in \
        [v["witness"] for v in doc["report"]["violations"]]


def test_negative_inline_values():
    status, doc, _ = report(["psi", "--surface", "sphere_3", "--lengths", "-1,0.5,-.25", "--h", "-1"])
    assert status == 0 and doc["lengths"] == [-1.0, 0.5, -0.25]


def test_metric_file(tmp_path):
    path = tmp_path / "metric.json"
    path.write_text(json.dumps({"surface": "sphere_4", "lengths": [0, 0, 0, 0, 0, 0]}))
    status, doc, _ = report(["delaunay", "--lengths", str(path)])
    assert status == 0 and doc["verdict"]["is_delaunay"]


def test_enumerations_and_flip():
    status, doc, _ = report(["loops", "--surface", "punctured_torus"])
    assert status == 0 and doc["count"] == len(doc["loops"]) == 13
    _, full, _ = report(["paths", "--surface", "sphere_4"])
    _, half, _ = report(["paths", "--surface", "sphere_4", "--dedup"])
    assert full["count"] == 2 * half["count"]
    status, doc, _ = report(["flip", "--surface", "punctured_torus", "--lengths", "2,0,0"])
    assert status == 0 and doc["record"]["is_delaunay"]


def test_probes():
    status, doc, _ = report(["probe-boundary", "--surface", "punctured_torus", "--h", "-1",
                             "--direction", "-1,0,0", "--steps", "4"])
    assert status == 0 and len(doc["probe"]["points"]) == 5
    status, doc, text = report(["probe-phi", "--surface", "sphere_4", "--samples", "20", "--seed", "4"])
    assert status == 0 and doc["min_ratio"] > 0 and doc["candidate_collision"] is False
    assert report(["probe-phi", "--surface", "sphere_4", "--samples", "20", "--seed", "4"])[2] == text


def test_selftest_command():
    status, doc, _ = report(["selftest"])
    assert status == 0 and doc["passed"] and all(c["passed"] for c in doc["checks"])


@pytest.mark.parametrize("argv, status, code", [
    (["psi", "--surface", "missing.json"], 2, "io_error"),
    (["psi", "--surface", "punctured_torus", "--lengths", "1,2"], 2, "invalid_metric"),
    (["psi", "--surface", "punctured_torus", "--lengths", "a,b,c"], 2, "invalid_metric"),
    (["psi", "--surface", "punctured_torus", "--lengths", "900,0,0", "--h", "1"], 1, "out_of_range"),
    (["invert", "--surface", "punctured_torus", "--target", "0,0,0"], 1, "not_in_polytope"),
    (["invert", "--surface", "punctured_torus"], 2, "io_error"),
])
def test_error_codes(argv, status, code):
    got, doc, _ = report(argv)
    assert got == status and doc["status"] == "error" and doc["error"]["code"] == code


def test_bad_surface_file(tmp_path):
    bad = tmp_path / "s.json"
    bad.write_text('{"num_edges": 3, "triangles": []}')
    status, doc, _ = report(["loops", "--surface", str(bad)])
    assert status == 2 and doc["error"]["code"] == "invalid_surface"


def test_unknown_subcommand():
    with pytest.raises(SystemExit) as info:
        run(["bogus"])
    assert info.value.code == 2


def test_main_writes_out_file(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["psi", "--surface", "sphere_3", "--out", str(out)]) == 0
    assert capsys.readouterr().out == ""
    first = out.read_text()
    main(["psi", "--surface", "sphere_3", "--out", str(out)])
    assert out.read_text() == first
    assert main(["psi", "--surface", "sphere_3", "--out", str(tmp_path / "no" / "r.json")]) == 2

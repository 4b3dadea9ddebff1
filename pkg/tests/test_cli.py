import json
import subprocess
import sys
from fractions import Fraction

import pytest

from reggecx.cli import main

from conftest import get_assembler


def run(*args):
    p = subprocess.run([sys.executable, "-m", "reggecx.cli", *args], capture_output=True, text=True)
    return p.returncode, p.stdout, p.stderr


def test_mesh_gen(tmp_path):
    out = tmp_path / "box.msh"
    code, stdout, _ = run("mesh", "gen", "--kind", "box", "--n", "2", "2", "2", "--out", str(out), "--format", "json")
    assert code == 0
    doc = json.loads(stdout)
    assert doc["counts"]["K"] == 48
    assert out.read_text().startswith("vertices 27")


def test_mesh_gen_cavity_betti(tmp_path, capsys):
    out = tmp_path / "cavity.msh"
    assert main(["mesh", "gen", "--kind", "cavity", "--out", str(out), "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out)["betti"] == [1, 0, 1, 0]
    assert main(["cohomology", "--complex", "whitney", "--mesh", str(out)]) == 0
    assert json.loads(capsys.readouterr().out)["dims"] == [1, 0, 1, 0]


def test_mesh_gen_tet_text(capsys):
    assert main(["mesh", "gen", "--kind", "tet"]) == 0
    assert "V=4" in capsys.readouterr().out


def test_cohomology_regge_tunnel(capsys):
    assert main(["cohomology", "--complex", "regge", "--mesh", "tunnel"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["dims"] == [6, 6, 0, 0] and doc["expected"] == [6, 6, 0, 0] and doc["pass"] is True


def test_cohomology_p1n_tet(capsys):
    assert main(["cohomology", "--complex", "p1n", "--mesh", "tet", "--format", "text"]) == 0
    assert "[12, 0, 0, 0]" in capsys.readouterr().out


def test_usage_errors():
    assert run("cohomology", "--complex", "nope", "--mesh", "tet")[0] == 2
    assert run("cohomology", "--complex", "regge", "--mesh", "/no/such/file")[0] == 2
    assert run("cohomology", "--complex", "regge", "--mesh", "box:2,x,2")[0] == 2
    assert run("verify", "--check", "nonexistent")[0] == 2
    assert run()[0] == 2


def test_bad_mesh_file(tmp_path):
    p = tmp_path / "bad.msh"
    p.write_text("vertices 4\n0 0 0\n1 0 0\n2 0 0\n0 1 0\ntets 1\n0 1 2 3\n")
    code, _, err = run("cohomology", "--complex", "regge", "--mesh", str(p))
    assert code == 2 and "zero volume" in err


def test_verify_filters(capsys):
    assert main(["verify", "--check", "inc_correction", "--mesh", "box:2,2,2"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert [c["name"] for c in doc["checks"]] == ["inc_correction"]
    assert main(["verify", "--check", "pointwise", "--seed", "7", "--format", "text"]) == 0
    assert "[PASS] pointwise_identities" in capsys.readouterr().out


def test_verify_all_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert run("verify", "--all", "--mesh", "two_tet", "--seed", "3", "--out", str(p))[0] == 0
    assert a.read_bytes() == b.read_bytes()


def _write(path, space, coeffs):
    path.write_text(json.dumps({"space": space, "coefficients": [str(Fraction(c)) for c in coeffs]}))


def test_cartan_zero_and_solve(tmp_path, capsys):
    a = get_assembler("box2")
    th, ga = tmp_path / "th.json", tmp_path / "ga.json"
    _write(th, "vh1", [0] * a.dim("vh1"))
    ga_vals = [0] * a.dim("wh1")
    ga_vals[5] = Fraction(2, 3)
    _write(ga, "wh1", ga_vals)
    out = tmp_path / "tr.json"
    assert main(["cartan", "--mesh", "box:2,2,2", "--theta", str(th), "--gamma", str(ga), "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    T, R = tmp_path / "T.json", tmp_path / "R.json"
    T.write_text(json.dumps(doc["torsion"]))
    R.write_text(json.dumps(doc["curvature"]))
    assert main(["cartan", "--mesh", "box:2,2,2", "--solve", "--torsion", str(T), "--curvature", str(R)]) == 0
    sol = json.loads(capsys.readouterr().out)
    assert sol["roundtrip"] is True and sol["theta"]["space"] == "vh1"


def test_cartan_zero_fields(tmp_path, capsys):
    a = get_assembler("two_tet")
    th, ga = tmp_path / "th.json", tmp_path / "ga.json"
    _write(th, "vh1", [0] * a.dim("vh1"))
    _write(ga, "wh1", [0] * a.dim("wh1"))
    assert main(["cartan", "--mesh", "two_tet", "--theta", str(th), "--gamma", str(ga)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert set(doc["torsion"]["coefficients"]) <= {"0"} and set(doc["curvature"]["coefficients"]) <= {"0"}


def test_cartan_mismatch(tmp_path, capsys):
    th, ga = tmp_path / "th.json", tmp_path / "ga.json"
    _write(th, "vh1", [0, 0])
    _write(ga, "wh1", [0] * 3)
    assert main(["cartan", "--mesh", "two_tet", "--theta", str(th), "--gamma", str(ga)]) == 2
    err = capsys.readouterr().err
    assert "vh1" in err and "expects" in err
    assert main(["cartan", "--mesh", "two_tet"]) == 2


def test_export_matrix(tmp_path):
    out = tmp_path / "m.mtx"
    assert main(["export-matrix", "--complex", "regge", "--degree", "0", "--mesh", "two_tet", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("%%MatrixMarket") and lines[2].split()[:2] == ["9", "15"]
    assert main(["export-matrix", "--complex", "regge", "--degree", "5", "--mesh", "two_tet"]) == 2

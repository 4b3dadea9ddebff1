import json

import pytest

from reggecx.assembly import COMPLEX_IDS, UnknownComplex
from reggecx.verify import (
    UnknownCheck, expected_cohomology, run_all, verify_cohomology, verify_diagrams, verify_twisted_structure,
)

from conftest import get_mesh


def test_expected_table():
    tet, tunnel, cavity = get_mesh("tet"), get_mesh("tunnel"), get_mesh("cavity")
    assert expected_cohomology("regge", tet) == [6, 0, 0, 0]
    assert expected_cohomology("regge", tunnel) == [6, 6, 0, 0]
    assert expected_cohomology("p0n", cavity) == [4, 0, 4, 0]
    assert expected_cohomology("wh_row", tunnel) == [3, 3, 0, 0]
    assert expected_cohomology("rm_aux", get_mesh("box2")) == [98, 0, 0, 0]
    assert expected_cohomology("p1n", tet) == [12, 0, 0, 0]
    assert expected_cohomology("vh_row", tet) is None
    with pytest.raises(UnknownComplex):
        expected_cohomology("nope", tet)


@pytest.mark.parametrize("cid", COMPLEX_IDS)
def test_verify_cohomology_tunnel(cid):
    r = verify_cohomology(cid, get_mesh("tunnel"))
    assert r.passed


def test_run_all_tet():
    rep = run_all(get_mesh("tet"), seed=0)
    assert rep.passed
    names = {c.name for c in rep.checks}
    assert {"inc_correction", "pointwise_identities", "t3_membership", "cohomology.regge"} <= names
    doc = json.loads(rep.to_json())
    assert doc["pass"] is True
    assert all("anchor" in c and "runtime" not in c for c in doc["checks"])


def test_run_all_box_reports_t3_informationally():
    rep = run_all(get_mesh("box2"), seed=1)
    assert rep.passed
    t3 = next(c for c in rep.checks if c.name == "t3_membership")
    assert t3.informational and not t3.passed
    assert t3.computed["edges_with_residual"] == len(get_mesh("box2").interior_edges)
    assert "INFO" in rep.to_text()


def test_filtered_checks():
    rep = run_all(get_mesh("box2"), checks=["inc_correction", "cohomology.regge"])
    assert [c.name for c in rep.checks] == ["inc_correction", "cohomology.regge"]
    with pytest.raises(UnknownCheck):
        run_all(get_mesh("tet"), checks=["nonexistent"])
    with pytest.raises(UnknownCheck):
        run_all(get_mesh("tet"), checks=["cohomology.nonexistent"])


def test_diagram_and_twisted_entry_points():
    m = get_mesh("box2")
    assert all(c.passed for c in verify_diagrams(m))
    res = verify_twisted_structure(m)
    assert all(c.passed for c in res if not c.informational)


def test_json_is_deterministic():
    m = get_mesh("two_tet")
    assert run_all(m, 4).to_json() == run_all(m, 4).to_json()


def test_failures_are_reported():
    from reggecx.verify import CheckResult, VerdictReport

    rep = VerdictReport({}, 0, [CheckResult("x", "a", 1, 2, False), CheckResult("y", "b", 1, 2, False, True)])
    assert not rep.passed
    assert [c.name for c in rep.failures()] == ["x"]

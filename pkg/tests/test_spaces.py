import pytest

from reggecx import smallalg as sa
from reggecx.spaces import (
    SPACE_IDS, Dof, UnknownSpace, enumerate_space, expected_dimension, payload, phi_basis, reg0p_rm, xhat2_basis,
)

from conftest import get_mesh


@pytest.mark.parametrize("name", ["tet", "two_tet", "box2", "cavity"])
def test_dimension_formulas(name):
    m = get_mesh(name)
    for sid in SPACE_IDS:
        sp = enumerate_space(sid, m)
        assert sp.dim == expected_dimension(sid, m), sid
        assert len(set(sp.dofs)) == sp.dim


def test_examples_on_single_tet():
    m = get_mesh("tet")
    assert enumerate_space("vh1", m).dim == 9
    assert [enumerate_space(s, m).dim for s in ("lag", "reg", "reg0p", "lag0p")] == [12, 6, 0, 0]


def test_deterministic_order():
    m = get_mesh("box2")
    a = enumerate_space("xhat2", m).dofs
    b = enumerate_space("xhat2", m).dofs
    assert a == b
    assert a[0] == Dof("XHat2", m.interior_edges[0], 0)


def test_unknown_space():
    with pytest.raises(UnknownSpace):
        enumerate_space("nope", get_mesh("tet"))
    with pytest.raises(UnknownSpace):
        expected_dimension("nope", get_mesh("tet"))


def test_local_dimensions():
    m = get_mesh("box2")
    e = m.interior_edges[0]
    basis, piv, free = xhat2_basis(m, e)
    assert len(basis) == 5 and len(free) == 5
    t = m.edge_tangent(e)
    for p in basis:
        rm = sa.RigidMotion.from_coords(p)
        for v in m.edges[e]:
            assert sa.dot(rm(m.vertices[v]), t) == 0
    f = m.interior_faces[0]
    n = m.face_normal(f)
    for j, p in enumerate(phi_basis(m, f)):
        rm = sa.RigidMotion.from_coords(p)
        for i, v in enumerate(m.faces[f]):
            assert rm(m.vertices[v]) == (n if i == j else (0, 0, 0))
    assert len(enumerate_space("p1n_e", m)) == 4 * len(m.interior_edges)


def test_reg0p_rigid_motion_vanishes_on_edge():
    m = get_mesh("box2")
    for e in m.interior_edges:
        rm = sa.RigidMotion.from_coords(reg0p_rm(m, e))
        assert rm.b == m.edge_tangent(e)
        for v in m.edges[e]:
            assert rm(m.vertices[v]) == (0, 0, 0)


def test_payload_examples():
    m = get_mesh("box2")
    fr = m.frames()
    f = m.interior_faces[0]
    simp, P, _ = payload(Dof("Vh2FaceNT", f, 0), m, fr)
    assert simp == m.faces[f] and P == sa.outer(fr.face_n[f], fr.face_t[f][0])
    e = m.interior_edges[0]
    _, P, _ = payload(Dof("Wh2Edge", e, 1), m, fr)
    assert P == sa.outer((0, 1, 0), fr.edge_t[e])
    _, p, _ = payload(Dof("Phi2Edge", e, 3), m, fr)
    assert p == sa.RigidMotion(sa.vec(0, 0, 0), sa.vec(1, 0, 0))
    b = fr.edge_t[e]
    assert sa.rm_curl(sa.RigidMotion(sa.vec(0, 0, 0), b)) == sa.smul(2, b)
    _, P, _ = payload(Dof("Vh2FaceTT", f, 0), m, fr)
    n = fr.face_n[f]
    assert sa.matvec(P, n) == (0, 0, 0) and sa.trace(P) == 2 * sa.dot(n, n)


def test_every_payload_resolves():
    m = get_mesh("two_tet")
    fr = m.frames()
    for sid in SPACE_IDS:
        for d in enumerate_space(sid, m).dofs:
            simp, _, desc = payload(d, m, fr)
            assert desc and simp

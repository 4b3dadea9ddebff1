import random
from fractions import Fraction

import pytest

from reggecx import cartan
from reggecx.cartan import DimensionMismatch, Field, NoSolution

from conftest import get_assembler


def rand_field(rng, n):
    return [Fraction(rng.randint(-5, 5), rng.randint(1, 4)) for _ in range(n)]


@pytest.fixture(scope="module")
def box():
    return get_assembler("box2")


def test_zero_in_zero_out(box):
    T, R = cartan.torsion_curvature(box, [0] * box.dim("vh1"), [0] * box.dim("wh1"))
    assert not any(T) and not any(R)


def test_exact_fields_have_no_torsion_or_curvature(box):
    rng = random.Random(2)
    A0 = box.twisted().maps[0]
    x = A0.apply(rand_field(rng, A0.ncols))
    nv = box.dim("vh1")
    T, R = cartan.torsion_curvature(box, x[:nv], x[nv:])
    assert not any(T) and not any(R)


def test_linearity(box):
    rng = random.Random(3)
    th1, th2 = rand_field(rng, box.dim("vh1")), rand_field(rng, box.dim("vh1"))
    g1, g2 = rand_field(rng, box.dim("wh1")), rand_field(rng, box.dim("wh1"))
    c = Fraction(-7, 3)
    T1, R1 = cartan.torsion_curvature(box, th1, g1)
    T2, R2 = cartan.torsion_curvature(box, th2, g2)
    T, R = cartan.torsion_curvature(box, [a + c * b for a, b in zip(th1, th2)], [a + c * b for a, b in zip(g1, g2)])
    assert T == [a + c * b for a, b in zip(T1, T2)]
    assert R == [a + c * b for a, b in zip(R1, R2)]


def test_single_face_delta_matches_operator_column():
    a = get_assembler("two_tet")
    f = a.mesh.interior_faces[0]
    gamma = [0] * a.dim("wh1")
    gamma[a.idx("wh1", "Wh1Face", f, 0)] = 1
    T, R = cartan.torsion_curvature(a, [0] * a.dim("vh1"), gamma)
    S1 = a.S_blocks[1]
    col = a.idx("wh1", "Wh1Face", f, 0)
    assert T == [-S1[i, col] for i in range(S1.nrows)]
    assert R == [a.wh_maps[1][i, col] for i in range(a.dim("wh2"))]


def test_roundtrip_and_bianchi(box):
    rng = random.Random(5)
    for _ in range(3):
        T, R = cartan.torsion_curvature(box, rand_field(rng, box.dim("vh1")), rand_field(rng, box.dim("wh1")))
        assert not any(cartan.bianchi_residual(box, T, R))
        theta, gamma = cartan.potential_solve(box, T, R)
        assert cartan.torsion_curvature(box, theta, gamma) == (T, R)


def test_not_closed_input(box):
    T = [0] * box.dim("vh2")
    R = [0] * box.dim("wh2")
    R[0] = 1
    res = cartan.potential_solve(box, T, R)
    assert isinstance(res, NoSolution) and res.reason == "not_closed" and any(res.witness)


def test_contractible_mesh_has_no_obstruction(box):
    assert cartan.find_obstruction(box) is None


@pytest.mark.slow
def test_cavity_obstruction_certificate():
    a = get_assembler("cavity")
    v = cartan.find_obstruction(a)
    assert v is not None
    nv = a.dim("vh2")
    res = cartan.potential_solve(a, v[:nv], v[nv:], certify=True)
    assert isinstance(res, NoSolution) and res.reason == "cohomology"
    z = res.functional
    A1 = a.twisted().maps[1]
    assert not any(A1.T.apply(z))
    assert sum(x * y for x, y in zip(z, v)) != 0


def test_regge_metric_curvature(box):
    rng = random.Random(8)
    u = rand_field(rng, box.dim("lag"))
    sigma = box.regge_def.apply(u)
    assert not any(cartan.regge_metric_curvature(box, sigma))
    unit = [0] * box.dim("reg")
    e = box.mesh.interior_edges[0]
    unit[e] = 1
    col = cartan.regge_metric_curvature(box, unit)
    assert col == [box.regge_inc[i, e] for i in range(box.dim("reg0p"))]


def test_dimension_mismatch(box):
    with pytest.raises(DimensionMismatch, match="vh1"):
        cartan.torsion_curvature(box, [0], [0] * box.dim("wh1"))


def test_field_json_roundtrip(tmp_path):
    f = Field("vh1", [Fraction(1, 3), Fraction(-2), Fraction(0)])
    p = tmp_path / "f.json"
    cartan.write_field(f, p)
    assert '"1/3"' in p.read_text()
    assert cartan.read_field(p) == f
    with pytest.raises(ValueError):
        Field.from_json('{"space": "vh1"}')

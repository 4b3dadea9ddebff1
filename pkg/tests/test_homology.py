import pytest

from reggecx.homology import (
    CochainComplex, ComplexPropertyViolated, absolute_coboundary_matrices, coefficient_tensor_check,
    cohomology_dims, de_rham_betti, relative_boundary_matrices, relative_homology_dims,
)
from reggecx.sparse import SparseMat, rank_exact

from conftest import get_mesh

BETTI = {"tet": (1, 0, 0, 0), "two_tet": (1, 0, 0, 0), "box2": (1, 0, 0, 0), "box3": (1, 0, 0, 0),
         "tunnel": (1, 1, 0, 0), "cavity": (1, 0, 1, 0)}


@pytest.mark.parametrize("name", list(BETTI))
def test_betti(name):
    assert de_rham_betti(get_mesh(name)) == BETTI[name]


@pytest.mark.parametrize("name", ["tet", "tunnel", "cavity"])
@pytest.mark.parametrize("d", [1, 3, 6])
def test_universal_coefficients(name, d):
    m = get_mesh(name)
    assert coefficient_tensor_check(m, d)
    assert relative_homology_dims(m, d) == [d * h for h in relative_homology_dims(m)]


def test_uct_examples():
    assert relative_homology_dims(get_mesh("tet"), 6)[3] == 6
    assert relative_homology_dims(get_mesh("tunnel"), 3)[2] == 3
    with pytest.raises(ValueError):
        coefficient_tensor_check(get_mesh("tet"), 0)


@pytest.mark.parametrize("name", ["two_tet", "box2", "tunnel", "cavity"])
def test_boundary_squares_to_zero(name):
    m = get_mesh(name)
    d = relative_boundary_matrices(m)
    assert (d[1] @ d[2]).is_zero() and (d[2] @ d[3]).is_zero()
    c = absolute_coboundary_matrices(m)
    assert (c[1] @ c[0]).is_zero() and (c[2] @ c[1]).is_zero()


def test_single_tet_relative_boundary_is_empty():
    d = relative_boundary_matrices(get_mesh("tet"))
    assert d[3].shape == (0, 1)
    assert rank_exact(d[3]) == 0


def test_cohomology_of_trivial_complexes():
    C = CochainComplex("q6", [6, 0], [SparseMat.zeros(0, 6)])
    r = cohomology_dims(C, [6, 0])
    assert r.cohomology == [6, 0] and r.passed and r.euler_consistent()
    assert cohomology_dims(C).passed is None


def test_complex_property_enforced():
    A = SparseMat.identity(2)
    with pytest.raises(ComplexPropertyViolated):
        CochainComplex("bad", [2, 2, 2], [A, A])
    with pytest.raises(ValueError):
        CochainComplex("shape", [2, 3], [A])


@pytest.mark.parametrize("name", ["tet", "tunnel", "cavity"])
def test_euler_consistency(name):
    from reggecx.assembly import Assembler

    r = cohomology_dims(Assembler(get_mesh(name)).whitney(), BETTI[name])
    assert r.passed and r.euler_consistent()
    assert r.as_dict()["dims"] == list(BETTI[name])

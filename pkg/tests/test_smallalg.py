import random
import time
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from reggecx import smallalg as sa

q = st.fractions(min_value=-5, max_value=5, max_denominator=7)
vec3 = st.tuples(q, q, q)
mat3 = st.tuples(vec3, vec3, vec3)


def test_mskw_first_axis():
    assert sa.mskw((1, 0, 0)) == ((0, 0, 0), (0, 0, -1), (0, 1, 0))


def test_S_of_identity_and_inverse():
    I = sa.identity()
    assert sa.S(I) == sa.mscale(-2, I)
    assert sa.Sinv(sa.mscale(-2, I)) == I


@given(mat3)
def test_sym_fixed_point_and_vskw_kernel(M):
    Ms = sa.sym(M)
    assert sa.sym(Ms) == Ms
    assert sa.vskw(Ms) == (0, 0, 0)


@given(vec3, vec3)
def test_mskw_is_cross(v, w):
    assert sa.matvec(sa.mskw(v), w) == sa.cross(v, w)


@given(mat3)
def test_S_Sinv_inverse(U):
    assert sa.Sinv(sa.S(U)) == tuple(tuple(Fraction(x) for x in r) for r in U)
    assert sa.S(sa.Sinv(U)) == tuple(tuple(Fraction(x) for x in r) for r in U)


@given(mat3)
def test_sym_is_identity_minus_mskw_vskw(M):
    assert sa.sym(M) == sa.msub(sa.mat(M), sa.mskw(sa.vskw(M)))


def test_rigid_motion_evaluation():
    e1 = (1, 0, 0)
    p = sa.RigidMotion(sa.vec(0, 0, 0), sa.vec(*e1))
    assert p((0, 0, 1)) == (0, -1, 0)
    a = sa.vec(1, 2, 3)
    assert sa.RigidMotion(a, sa.vec(0, 0, 0))((5, -1, 2)) == a


@given(vec3, vec3)
def test_rm_curl_is_twice_b(a, b):
    p = sa.RigidMotion(sa.vec(*a), sa.vec(*b))
    assert sa.rm_curl(p) == sa.smul(2, b)
    assert tuple(sa.pcurl(sa.rm_field(p))) == tuple(sa.Poly.const(c) for c in sa.smul(2, b))


@given(vec3, vec3)
def test_rm_value_rows(x, c6):
    coords = list(x) + list(c6)
    p = sa.RigidMotion.from_coords(coords)
    y = (Fraction(1, 3), Fraction(-2), Fraction(5, 7))
    R = sa.rm_value_rows(y)
    assert tuple(sum(R[i][j] * coords[j] for j in range(6)) for i in range(3)) == p(y)


def test_algebraic_map_shapes():
    assert sa.algebraic_map("tr", sa.identity()) == 3
    assert sa.algebraic_map("mskw", (1, 0, 0)) == sa.mskw((1, 0, 0))
    with pytest.raises(sa.ShapeMismatch):
        sa.algebraic_map("mskw", sa.identity())
    with pytest.raises(sa.ShapeMismatch):
        sa.algebraic_map("sym", (1, 2, 3))
    with pytest.raises(sa.ShapeMismatch):
        sa.algebraic_map("iota", (1, 2, 3))
    with pytest.raises(sa.ShapeMismatch):
        sa.algebraic_map("nonsense", 1)


def test_mskw_cross_identity_axis_case():
    c = n = (1, 0, 0)
    lhs = sa.rowcross(sa.mskw(c), n)
    assert lhs == sa.madd(sa.iota(-1), sa.outer(n, c))


def test_pointwise_identities_fast_and_complete():
    t = time.perf_counter()
    counts = sa.verify_pointwise_identities(seed=7, instances=20)
    assert time.perf_counter() - t < 1.0
    assert counts == {k: 20 for k in counts} and len(counts) == 4


def test_pointwise_identities_deterministic():
    assert sa.verify_pointwise_identities(3, 5) == sa.verify_pointwise_identities(3, 5)


def test_traceless_identity_against_sympy():
    """Independent symbolic check of p.curl(A).n = curl(p.A).n + 1/2 n.A.curl p for traceless A."""
    x, y, z = X = sympy.symbols("x y z")
    rng = random.Random(5)
    r = lambda: sympy.Rational(rng.randint(-4, 4), rng.randint(1, 3))
    a = sympy.Matrix([r() for _ in range(3)])
    b = sympy.Matrix([r() for _ in range(3)])
    p = a + b.cross(sympy.Matrix(X))
    A = sympy.Matrix(3, 3, lambda i, j: sum(r() * m for m in (1, x, y, z, x * y, z**2)))
    A = A - A.trace() / 3 * sympy.eye(3)
    n = sympy.Matrix([r() for _ in range(3)])

    def curl_vec(u):
        return sympy.Matrix([u[2].diff(y) - u[1].diff(z), u[0].diff(z) - u[2].diff(x), u[1].diff(x) - u[0].diff(y)])

    curlA = sympy.Matrix.vstack(*[curl_vec(A.row(i)).T for i in range(3)])
    lhs = (p.T * curlA * n)[0]
    rhs = (curl_vec((p.T * A).T).T * n)[0] + sympy.Rational(1, 2) * (n.T * A * curl_vec(p))[0]
    assert sympy.expand(lhs - rhs) == 0

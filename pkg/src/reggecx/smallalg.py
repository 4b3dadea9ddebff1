"""Exact 3D vector/matrix algebra, rigid motions and polynomial fields.

Vectors are 3-tuples and matrices are 3-tuples of row 3-tuples, both with
:class:`~fractions.Fraction` entries.  Differential operators act row-wise on
matrix fields: ``(grad u)[i][j] = d_j u_i`` and row ``i`` of ``curl A`` is the
curl of row ``i`` of ``A``.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

Vec3 = tuple[Fraction, Fraction, Fraction]
Mat3 = tuple[Vec3, Vec3, Vec3]

ZERO = Fraction(0)
ONE = Fraction(1)


class ShapeMismatch(ValueError):
    pass


class IdentityViolated(AssertionError):
    def __init__(self, identity: str, counterexample):
        super().__init__(f"identity {identity} violated: {counterexample!r}")
        self.identity = identity
        self.counterexample = counterexample


def vec(*xs) -> Vec3:
    if len(xs) == 1:
        xs = tuple(xs[0])
    return tuple(Fraction(x) for x in xs)  # type: ignore[return-value]


def mat(rows) -> Mat3:
    return tuple(tuple(Fraction(x) for x in r) for r in rows)  # type: ignore[return-value]


def add(u, v):
    return tuple(a + b for a, b in zip(u, v))


def sub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def smul(c, u):
    return tuple(c * a for a in u)


def dot(u, v):
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


def cross(u, v):
    return (
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    )


def det3(a, b, c):
    return dot(a, cross(b, c))


def outer(u, v) -> Mat3:
    return tuple(tuple(a * b for b in v) for a in u)  # type: ignore[return-value]


def identity() -> Mat3:
    return mat(((1, 0, 0), (0, 1, 0), (0, 0, 1)))


def zeros() -> Mat3:
    return mat(((0, 0, 0),) * 3)


def madd(A, B) -> Mat3:
    return tuple(add(a, b) for a, b in zip(A, B))  # type: ignore[return-value]


def msub(A, B) -> Mat3:
    return tuple(sub(a, b) for a, b in zip(A, B))  # type: ignore[return-value]


def mscale(c, A) -> Mat3:
    return tuple(smul(c, a) for a in A)  # type: ignore[return-value]


def transpose(A) -> Mat3:
    return tuple(tuple(A[i][j] for i in range(3)) for j in range(3))  # type: ignore[return-value]


def matmul(A, B) -> Mat3:
    Bt = transpose(B)
    return tuple(tuple(dot(a, b) for b in Bt) for a in A)  # type: ignore[return-value]


def matvec(A, v) -> Vec3:
    return tuple(dot(a, v) for a in A)  # type: ignore[return-value]


def vecmat(v, A) -> Vec3:
    return matvec(transpose(A), v)


def trace(A):
    return A[0][0] + A[1][1] + A[2][2]


def frob(A, B):
    return sum((A[i][j] * B[i][j] for i in range(3) for j in range(3)), ZERO)


def sym(A) -> Mat3:
    return mscale(Fraction(1, 2), madd(A, transpose(A)))


def skw(A) -> Mat3:
    return mscale(Fraction(1, 2), msub(A, transpose(A)))


def iota(u) -> Mat3:
    return mscale(Fraction(u), identity())


def dev(A) -> Mat3:
    return msub(A, iota(trace(A) / 3))


def mskw(v) -> Mat3:
    return (
        (ZERO, -v[2], v[1]),
        (v[2], ZERO, -v[0]),
        (-v[1], v[0], ZERO),
    )


def vskw(A) -> Vec3:
    s = skw(A)
    return (s[2][1], s[0][2], s[1][0])


def S(A) -> Mat3:
    """``A^T - tr(A) I``."""
    return msub(transpose(A), iota(trace(A)))


def Sinv(A) -> Mat3:
    """Inverse of :func:`S` in three dimensions: ``A^T - tr(A)/2 I``."""
    return msub(transpose(A), iota(trace(A) / 2))


def rowcross(A, n) -> Mat3:
    """Row-wise cross product ``A x n``."""
    return tuple(cross(a, n) for a in A)  # type: ignore[return-value]


_KINDS: dict[str, tuple[str, Callable]] = {
    "sym": ("M", sym),
    "skw": ("M", skw),
    "tr": ("M", trace),
    "dev": ("M", dev),
    "iota": ("s", iota),
    "mskw": ("V", mskw),
    "vskw": ("M", vskw),
    "S": ("M", S),
    "Sinv": ("M", Sinv),
}


def algebraic_map(kind: str, arg):
    """Apply one of the named pointwise algebraic maps with a shape check."""
    if kind not in _KINDS:
        raise ShapeMismatch(f"unknown algebraic map {kind!r}")
    want, fn = _KINDS[kind]
    if want == "M":
        ok = len(arg) == 3 and all(isinstance(r, (tuple, list)) and len(r) == 3 for r in arg)
        if not ok:
            raise ShapeMismatch(f"{kind} expects a 3x3 matrix")
        return fn(mat(arg))
    if want == "V":
        if len(arg) != 3 or any(isinstance(x, (tuple, list)) for x in arg):
            raise ShapeMismatch(f"{kind} expects a 3-vector")
        return fn(vec(arg))
    if isinstance(arg, (tuple, list)):
        raise ShapeMismatch(f"{kind} expects a scalar")
    return fn(arg)


def solve3(A, b) -> Vec3:
    """Exact solve of a nonsingular 3x3 system (Cramer's rule)."""
    cols = transpose(A)
    d = det3(*cols)
    if d == 0:
        raise ZeroDivisionError("singular 3x3 system")
    out = []
    for i in range(3):
        c = list(cols)
        c[i] = tuple(b)
        out.append(det3(*c) / d)
    return tuple(out)  # type: ignore[return-value]


def solve_dense(A: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> list[Fraction]:
    """Exact Gaussian elimination for a small nonsingular square system."""
    n = len(A)
    M = [list(map(Fraction, row)) + [Fraction(bi)] for row, bi in zip(A, b)]
    for c in range(n):
        p = next((r for r in range(c, n) if M[r][c] != 0), None)
        if p is None:
            raise ZeroDivisionError("singular system")
        M[c], M[p] = M[p], M[c]
        inv = 1 / M[c][c]
        M[c] = [x * inv for x in M[c]]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c]
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    return [M[r][n] for r in range(n)]


# ----------------------------------------------------------------------
# rigid motions


@dataclass(frozen=True)
class RigidMotion:
    """``x -> a + b x x``."""

    a: Vec3
    b: Vec3

    @classmethod
    def from_coords(cls, c: Sequence) -> "RigidMotion":
        return cls(vec(c[0:3]), vec(c[3:6]))

    @property
    def coords(self) -> tuple[Fraction, ...]:
        return tuple(self.a) + tuple(self.b)

    def __call__(self, x) -> Vec3:
        return rm_eval(self, x)

    def __add__(self, other: "RigidMotion") -> "RigidMotion":
        return RigidMotion(add(self.a, other.a), add(self.b, other.b))

    def scale(self, c) -> "RigidMotion":
        return RigidMotion(smul(c, self.a), smul(c, self.b))


def rm_basis() -> list[RigidMotion]:
    z = vec(0, 0, 0)
    axes = [vec(1, 0, 0), vec(0, 1, 0), vec(0, 0, 1)]
    return [RigidMotion(e, z) for e in axes] + [RigidMotion(z, e) for e in axes]


def rm_eval(p: RigidMotion, x) -> Vec3:
    return add(p.a, cross(p.b, x))


def rm_curl(p: RigidMotion) -> Vec3:
    return smul(2, p.b)


def rm_value_rows(x) -> list[list[Fraction]]:
    """3x6 matrix ``R`` with ``p(x) = R @ coords(p)``."""
    # b x x = -x x b = -mskw(x) b
    mx = mskw(x)
    return [[ONE if i == j else ZERO for j in range(3)] + [-mx[i][j] for j in range(3)] for i in range(3)]


# ----------------------------------------------------------------------
# polynomials in x, y, z


class Poly:
    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms: dict[tuple[int, int, int], Fraction] = {}
        if terms:
            for k, v in terms.items():
                if v != 0:
                    self.terms[k] = Fraction(v)

    @classmethod
    def const(cls, c) -> "Poly":
        return cls({(0, 0, 0): c})

    @classmethod
    def coord(cls, i: int) -> "Poly":
        e = [0, 0, 0]
        e[i] = 1
        return cls({tuple(e): 1})

    def __add__(self, other):
        other = _poly(other)
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = t.get(k, 0) + v
        return Poly(t)

    __radd__ = __add__

    def __neg__(self):
        return Poly({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-_poly(other))

    def __rsub__(self, other):
        return _poly(other) - self

    def __mul__(self, other):
        other = _poly(other)
        t: dict = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                k = (k1[0] + k2[0], k1[1] + k2[1], k1[2] + k2[2])
                t[k] = t.get(k, 0) + v1 * v2
        return Poly(t)

    __rmul__ = __mul__

    def diff(self, i: int) -> "Poly":
        t = {}
        for k, v in self.terms.items():
            if k[i]:
                kk = list(k)
                kk[i] -= 1
                t[tuple(kk)] = v * k[i]
        return Poly(t)

    def __call__(self, x) -> Fraction:
        return sum((v * x[0] ** k[0] * x[1] ** k[1] * x[2] ** k[2] for k, v in self.terms.items()), ZERO)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, (Poly, int, Fraction)) and (self - other).is_zero()

    def __repr__(self):
        return f"Poly({self.terms})"


def _poly(x) -> Poly:
    return x if isinstance(x, Poly) else Poly.const(x)


def random_poly(rng: random.Random, degree: int) -> Poly:
    terms = {}
    for a in range(degree + 1):
        for b in range(degree + 1 - a):
            for c in range(degree + 1 - a - b):
                terms[(a, b, c)] = _rand_q(rng)
    return Poly(terms)


def _rand_q(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-9, 9), rng.randint(1, 5))


def random_vec(rng: random.Random) -> Vec3:
    return tuple(_rand_q(rng) for _ in range(3))  # type: ignore[return-value]


def random_mat(rng: random.Random) -> Mat3:
    return tuple(random_vec(rng) for _ in range(3))  # type: ignore[return-value]


# vector fields are 3-tuples of Poly, matrix fields 3-tuples of vector fields

def pgrad(u):
    return tuple(tuple(u[i].diff(j) for j in range(3)) for i in range(3))


def pcurl(u):
    return (
        u[2].diff(1) - u[1].diff(2),
        u[0].diff(2) - u[2].diff(0),
        u[1].diff(0) - u[0].diff(1),
    )


def pcurl_rows(A):
    return tuple(pcurl(a) for a in A)


def pdef(u):
    G = pgrad(u)
    return tuple(tuple((G[i][j] + G[j][i]) * Fraction(1, 2) for j in range(3)) for i in range(3))


def rm_field(p: RigidMotion):
    X = (Poly.coord(0), Poly.coord(1), Poly.coord(2))
    b = p.b
    bx = (b[1] * X[2] - b[2] * X[1], b[2] * X[0] - b[0] * X[2], b[0] * X[1] - b[1] * X[0])
    return tuple(Poly.const(p.a[i]) + bx[i] for i in range(3))


def _pdot(u, v):
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


def _vec_mat(u, A):
    return tuple(sum((u[l] * A[l][j] for l in range(3)), Poly()) for j in range(3))


def _mat_vec(A, v):
    return tuple(sum((A[i][j] * v[j] for j in range(3)), Poly()) for i in range(3))


# ----------------------------------------------------------------------
# identity checks


def _check(name, lhs, rhs, ctx):
    if isinstance(lhs, Poly) or isinstance(rhs, Poly):
        ok = (_poly(lhs) - _poly(rhs)).is_zero()
    else:
        ok = lhs == rhs
    if not ok:
        raise IdentityViolated(name, ctx)


def verify_pointwise_identities(seed: int = 0, instances: int = 20) -> dict[str, int]:
    """Check the pointwise tensor identities on random exact inputs.

    Returns the number of instances checked per identity; raises
    :class:`IdentityViolated` on the first failure.
    """
    rng = random.Random(seed)
    counts = {k: 0 for k in ("a_rm_curl_traceless", "b_skew_gradient", "c_mskw_cross", "d_algebra")}
    for _ in range(instances):
        # (a) p . curl A . n = curl(p.A) . n + 1/2 n . A . curl p, A traceless
        p = RigidMotion(random_vec(rng), random_vec(rng))
        pf = rm_field(p)
        A = [[random_poly(rng, 2) for _ in range(3)] for _ in range(3)]
        tr = (A[0][0] + A[1][1] + A[2][2]) * Fraction(1, 3)
        for i in range(3):
            A[i][i] = A[i][i] - tr
        A = tuple(tuple(r) for r in A)
        n = random_vec(rng)
        lhs = _pdot(_vec_mat(pf, pcurl_rows(A)), n)
        rhs = _pdot(pcurl(_vec_mat(pf, A)), n) + Fraction(1, 2) * _pdot(_vec_mat(n, A), pcurl(pf))
        _check("a", lhs, rhs, (p, n))
        # curl of a rigid motion is 2b
        _check("a", tuple(pcurl(pf)) == tuple(Poly.const(c) for c in rm_curl(p)), True, p)
        counts["a_rm_curl_traceless"] += 1

        # (b) grad u : (a x b) - Def u : (a x b) = -1/2 curl u . (a cross b)
        u = tuple(random_poly(rng, 2) for _ in range(3))
        a, b = random_vec(rng), random_vec(rng)
        ab = outer(a, b)
        G, D = pgrad(u), pdef(u)
        lhs = sum(((G[i][j] - D[i][j]) * ab[i][j] for i in range(3) for j in range(3)), Poly())
        rhs = Fraction(-1, 2) * _pdot(pcurl(u), cross(a, b))
        _check("b", lhs, rhs, (u, a, b))
        counts["b_skew_gradient"] += 1

        # (c) mskw(c) x n = -(c.n) I + n (x) c
        c, n = random_vec(rng), random_vec(rng)
        _check("c", rowcross(mskw(c), n), madd(iota(-dot(c, n)), outer(n, c)), (c, n))
        counts["c_mskw_cross"] += 1

        # (d) sym = id - mskw vskw; S Sinv = Sinv S = id; A : mskw(n) = 2 vskw(A) . n
        M = random_mat(rng)
        _check("d", sym(M), msub(M, mskw(vskw(M))), M)
        _check("d", Sinv(S(M)), M, M)
        _check("d", S(Sinv(M)), M, M)
        _check("d", frob(M, mskw(n)), 2 * dot(vskw(M), n), (M, n))
        _check("d", trace(S(M)), -2 * trace(M), M)
        w = random_vec(rng)
        _check("d", matvec(mskw(n), w), cross(n, w), (n, w))
        counts["d_algebra"] += 1
    return counts

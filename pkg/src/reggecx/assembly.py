"""Exact sparse matrices of every complex, chain map and algebraic coupling.

All operators are assembled from local formulas on simplices:

* the outward sign ``s(f, K)`` of the face normal ``n_f`` relative to tet
  ``K`` governs every jump across a face;
* the conormal sign ``o(e, f)`` of ``t_e x n_f`` relative to face ``f``
  governs every Stokes-type transfer from faces to edges;
* the combinatorial incidence numbers ``O(tau, sigma)`` enter the rows whose
  coefficients are rigid motions and the piecewise-constant simplicial rows.

Every decomposition of a payload into a target basis is checked for a zero
residual; a nonzero residual raises :class:`DecompositionResidual`.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Sequence

from . import smallalg as sa
from .homology import CochainComplex, absolute_coboundary_matrices, relative_boundary_matrices
from .mesh import SimplicialComplex3, incidence
from .sparse import SparseMat, block, hstack, vstack
from .spaces import DofSpace, enumerate_space, phi_basis, reg0p_rm, xhat2_basis

ZERO = Fraction(0)


class DecompositionResidual(ArithmeticError):
    def __init__(self, where: str, residual):
        super().__init__(f"nonzero residual while decomposing {where}: {residual}")
        self.where = where
        self.residual = residual


# ----------------------------------------------------------------------
# linear forms: dict column -> coefficient


def _lf_add(acc: dict, form: dict, c=1) -> None:
    if c == 0:
        return
    for j, v in form.items():
        w = acc.get(j, ZERO) + c * v
        if w:
            acc[j] = w
        else:
            acc.pop(j, None)


def _lf_vec(forms: Sequence[dict], w) -> dict:
    """``sum_i w_i forms[i]``."""
    out: dict = {}
    for f, c in zip(forms, w):
        _lf_add(out, f, c)
    return out


def _columns(forms: Sequence[dict]) -> set:
    return set().union(*[set(f) for f in forms]) if forms else set()


class _Triplets:
    def __init__(self, nrows: int, ncols: int):
        self.shape = (nrows, ncols)
        self.t: list[tuple[int, int, Fraction]] = []

    def add(self, i: int, j: int, v) -> None:
        if v:
            self.t.append((i, j, Fraction(v)))

    def add_form(self, i: int, form: dict, c=1) -> None:
        for j, v in form.items():
            self.add(i, j, c * v)

    def build(self) -> SparseMat:
        return SparseMat.from_triplets(*self.shape, self.t)


def _decompose(target, basis: Sequence, inner: Callable, combine: Callable, where: str) -> list[Fraction]:
    """Coefficients of ``target`` in a mutually orthogonal ``basis``; checks the residual."""
    coeffs = [inner(target, b) / inner(b, b) for b in basis]
    rest = combine(target, [(c, b) for c, b in zip(coeffs, basis)])
    if _nonzero(rest):
        raise DecompositionResidual(where, rest)
    return coeffs


def _nonzero(x) -> bool:
    if isinstance(x, (tuple, list)):
        return any(_nonzero(y) for y in x)
    return x != 0


def _vec_rest(v, terms):
    for c, b in terms:
        v = sa.sub(v, sa.smul(c, b))
    return v


def _mat_rest(A, terms):
    for c, B in terms:
        A = sa.msub(A, sa.mscale(c, B))
    return A


def decompose_vector(v, basis, where="vector") -> list[Fraction]:
    return _decompose(v, basis, sa.dot, _vec_rest, where)


def decompose_matrix(A, basis, where="matrix") -> list[Fraction]:
    return _decompose(A, basis, sa.frob, _mat_rest, where)


# ----------------------------------------------------------------------


@dataclass
class ChainMap:
    label: str
    source: str
    target: str
    maps: list[SparseMat]


class Assembler:
    """Builds and caches every operator on one mesh."""

    def __init__(self, mesh: SimplicialComplex3):
        self.mesh = mesh
        self.fr = mesh.frames()
        self._spaces: dict[str, DofSpace] = {}
        self._s = {}
        self._o = {}

    # basic data ------------------------------------------------------
    def space(self, sid: str) -> DofSpace:
        if sid not in self._spaces:
            self._spaces[sid] = enumerate_space(sid, self.mesh)
        return self._spaces[sid]

    def dim(self, sid: str) -> int:
        return self.space(sid).dim

    def idx(self, sid: str, kind: str, simplex: int, i: int = 0) -> int | None:
        return self.space(sid).get(kind, simplex, i)

    def s(self, f: int, k: int) -> int:
        key = (f, k)
        if key not in self._s:
            self._s[key] = self.mesh.outward_sign(f, k)
        return self._s[key]

    def o(self, e: int, f: int) -> int:
        key = (e, f)
        if key not in self._o:
            self._o[key] = self.mesh.conormal_sign(e, f)
        return self._o[key]

    def x(self, v: int):
        return self.mesh.vertices[v]

    def edge_of(self, a: int, b: int) -> int:
        return self.mesh.edge_index[(min(a, b), max(a, b))]

    def tet_faces(self, k: int) -> list[int]:
        return [self.mesh.face_index[f] for f in itertools.combinations(self.mesh.tets[k], 3)]

    def tet_edges(self, k: int) -> list[int]:
        return [self.mesh.edge_index[e] for e in itertools.combinations(self.mesh.tets[k], 2)]

    @cached_property
    def bary_grads(self) -> list[dict[int, tuple]]:
        """Per tet: vertex -> gradient of its barycentric coordinate."""
        out = []
        for t in self.mesh.tets:
            p0 = self.x(t[0])
            X = [sa.sub(self.x(v), p0) for v in t[1:]]
            g = {}
            for m, v in enumerate(t[1:]):
                g[v] = sa.solve3(X, tuple(Fraction(int(i == m)) for i in range(3)))
            g[t[0]] = sa.smul(-1, sa.add(sa.add(g[t[1]], g[t[2]]), g[t[3]]))
            out.append(g)
        return out

    @cached_property
    def relative_d(self) -> dict[int, SparseMat]:
        return relative_boundary_matrices(self.mesh)

    # local fields as linear forms in global dofs ---------------------
    def lag_grad_forms(self, k: int, sid: str = "lag") -> list[list[dict]]:
        """``G[i][j]`` of the cellwise gradient of a vector Lagrange field."""
        g = self.bary_grads[k]
        G = [[{} for _ in range(3)] for _ in range(3)]
        for v, gv in g.items():
            for i in range(3):
                col = self.idx(sid, "LagNode", v, i)
                for j in range(3):
                    if gv[j]:
                        G[i][j][col] = gv[j]
        return G

    def slag_grad_forms(self, k: int) -> list[dict]:
        g = self.bary_grads[k]
        out = [{} for _ in range(3)]
        for v, gv in g.items():
            col = self.idx("slag", "ScalarLagNode", v)
            for j in range(3):
                if gv[j]:
                    out[j][col] = gv[j]
        return out

    def regge_local_basis(self, k: int) -> dict[int, tuple]:
        """Edge index -> constant symmetric matrix dual to the edge functionals on tet ``k``."""
        g = self.bary_grads[k]
        out = {}
        for a, b in itertools.combinations(self.mesh.tets[k], 2):
            M = sa.outer(g[a], g[b])
            out[self.edge_of(a, b)] = sa.mscale(-1, sa.sym(M))
        return out

    @cached_property
    def ned_local(self) -> list[dict[int, list[Fraction]]]:
        """Per tet: edge -> RM coordinates of the dual basis of ``u(m_e) . t_e``."""
        out = []
        for k in range(len(self.mesh.tets)):
            edges = self.tet_edges(k)
            rows = []
            for e in edges:
                t = self.fr.edge_t[e]
                m = self.mesh.midpoint(self.mesh.edges[e])
                rows.append(list(t) + list(sa.cross(m, t)))
            inv_cols = {}
            for c, e in enumerate(edges):
                rhs = [Fraction(int(i == c)) for i in range(6)]
                inv_cols[e] = sa.solve_dense(rows, rhs)
            out.append(inv_cols)
        return out

    def ned_rm_forms(self, k: int) -> list[dict]:
        """Six RM coordinates of ``u|_K`` as forms in Nedelec dofs."""
        forms = [{} for _ in range(6)]
        for e, c in self.ned_local[k].items():
            col = self.idx("ned", "NedEdge", e)
            for i in range(6):
                if c[i]:
                    forms[i][col] = c[i]
        return forms

    def nedc_vertex_forms(self, k: int, v: int, sid: str = "nedc") -> list[dict]:
        """Value ``w_K(x_v)`` of a full-linear Nedelec field, as forms in its edge moments.

        Along edge ``(a, b)``, ``a < b``, ``w . t`` equals ``m0 - m1/2`` at ``a`` and
        ``m0 + m1/2`` at ``b``; the vector at ``v`` follows from the three edge
        tangents through ``v`` using barycentric gradients as the dual basis.
        """
        g = self.bary_grads[k]
        out = [{} for _ in range(3)]
        for o in self.mesh.tets[k]:
            if o == v:
                continue
            e = self.edge_of(v, o)
            first = v < o
            sgn = 1 if first else -1
            val = {self.idx(sid, "NedCEdge", e, 0): Fraction(1), self.idx(sid, "NedCEdge", e, 1): Fraction(-1 if first else 1, 2)}
            for i in range(3):
                _lf_add(out[i], val, sgn * g[o][i])
        return out

    # embeddings and coordinate maps ---------------------------------
    @cached_property
    def phi_bases(self) -> dict[int, list[list[Fraction]]]:
        return {f: phi_basis(self.mesh, f) for f in self.mesh.interior_faces}

    @cached_property
    def xhat_bases(self) -> dict[int, tuple]:
        return {e: xhat2_basis(self.mesh, e) for e in self.mesh.interior_edges}

    @cached_property
    def emb_phi(self) -> SparseMat:
        """Phi -> X^1 (RM coordinates per interior face)."""
        T = _Triplets(self.dim("x1"), self.dim("phi"))
        for f, basis in self.phi_bases.items():
            for j, p in enumerate(basis):
                col = self.idx("phi", "PhiNormal", f, j)
                for a in range(6):
                    T.add(self.idx("x1", "Phi1Face", f, a), col, p[a])
        return T.build()

    @cached_property
    def emb_xhat2(self) -> SparseMat:
        T = _Triplets(self.dim("x2"), self.dim("xhat2"))
        for e, (basis, _, _) in self.xhat_bases.items():
            for j, p in enumerate(basis):
                col = self.idx("xhat2", "XHat2", e, j)
                for a in range(6):
                    T.add(self.idx("x2", "Phi2Edge", e, a), col, p[a])
        return T.build()

    @cached_property
    def xhat2_constraint(self) -> SparseMat:
        """Rows ``a . t + b . (m x t)``: X^2 coordinates lie in the reduced space iff these vanish."""
        T = _Triplets(len(self.mesh.interior_edges), self.dim("x2"))
        for r, e in enumerate(self.mesh.interior_edges):
            t = self.fr.edge_t[e]
            m = self.mesh.midpoint(self.mesh.edges[e])
            row = list(t) + list(sa.cross(m, t))
            for a in range(6):
                T.add(r, self.idx("x2", "Phi2Edge", e, a), row[a])
        return T.build()

    def to_xhat2(self, M: SparseMat, where: str) -> SparseMat:
        """Reduced coordinates of X^2-valued columns; verifies membership."""
        bad = self.xhat2_constraint @ M
        if not bad.is_zero():
            raise DecompositionResidual(where, f"{bad.nnz} violated edge constraints")
        T = _Triplets(self.dim("xhat2"), self.dim("x2"))
        for e, (_, _, free) in self.xhat_bases.items():
            for j, a in enumerate(free):
                T.add(self.idx("xhat2", "XHat2", e, j), self.idx("x2", "Phi2Edge", e, a), 1)
        return T.build() @ M

    @cached_property
    def emb_reg0p(self) -> SparseMat:
        """(Reg_0)' -> X^2 via ``t_e x (x - m_e)``."""
        T = _Triplets(self.dim("x2"), self.dim("reg0p"))
        for e in self.mesh.interior_edges:
            p = reg0p_rm(self.mesh, e)
            col = self.idx("reg0p", "RegDualEdge", e)
            for a in range(6):
                T.add(self.idx("x2", "Phi2Edge", e, a), col, p[a])
        return T.build()

    def phi_coords_from_vertex_jumps(self, f: int, jumps: Sequence[list[dict]], where: str) -> list[dict]:
        """Phi coordinates ``J(x_j) . n / n . n`` from vertex-valued jump forms; checks normality."""
        n = self.fr.face_n[f]
        nn = sa.dot(n, n)
        t1, t2 = self.fr.face_t[f]
        out = []
        for J in jumps:
            for t in (t1, t2):
                if _lf_vec(J, t):
                    raise DecompositionResidual(where, f"tangential jump on face {self.mesh.faces[f]}")
            out.append(_lf_vec(J, [c / nn for c in n]))
        return out

    # ------------------------------------------------------------------
    # rows whose coefficients are rigid motions

    @cached_property
    def face_cell_signs(self) -> SparseMat:
        """``s(f, K)`` on interior faces x tets."""
        T = _Triplets(len(self.mesh.interior_faces), len(self.mesh.tets))
        for r, f in enumerate(self.mesh.interior_faces):
            for k in self.mesh.face_tets[f]:
                T.add(r, k, self.s(f, k))
        return T.build()

    @cached_property
    def x_rm_maps(self) -> list[SparseMat]:
        d = self.relative_d
        return [self.face_cell_signs.kron_identity(6), d[2].kron_identity(6), d[1].kron_identity(6)]

    def x_rm(self) -> CochainComplex:
        m = self.x_rm_maps
        return CochainComplex("x_rm", [self.dim(s) for s in ("x0", "x1", "x2", "x3")], list(m), ["x0", "x1", "x2", "x3"])

    def rm_simplicial(self) -> CochainComplex:
        """Relative simplicial chains with RM coefficients, degree-shifted to a cochain complex."""
        d = self.relative_d
        maps = [d[3].kron_identity(6), d[2].kron_identity(6), d[1].kron_identity(6)]
        return CochainComplex("rm_simplicial", [self.dim(s) for s in ("x0", "x1", "x2", "x3")], maps, ["x0", "x1", "x2", "x3"])

    def kappa(self) -> ChainMap:
        """x_rm -> rm_simplicial.  Degree 0 absorbs the orientation of each sorted tet."""
        k0 = SparseMat.diag([-e for e in self.mesh.tet_sign]).kron_identity(6)
        ids = [SparseMat.identity(self.dim(s)) for s in ("x1", "x2", "x3")]
        return ChainMap("kappa", "x_rm", "rm_simplicial", [k0] + ids)

    # ------------------------------------------------------------------
    # W row: piecewise constant vector coefficients

    @cached_property
    def wh_maps(self) -> list[SparseMat]:
        m = self.mesh
        G = _Triplets(self.dim("wh1"), self.dim("wh0"))
        for f in m.interior_faces:
            for k in m.face_tets[f]:
                for c in range(3):
                    G.add(self.idx("wh1", "Wh1Face", f, c), self.idx("wh0", "Wh0Cell", k, c), -self.s(f, k))
        C = _Triplets(self.dim("wh2"), self.dim("wh1"))
        for e in m.interior_edges:
            for f in m.edge_faces[e]:
                for c in range(3):
                    C.add(self.idx("wh2", "Wh2Edge", e, c), self.idx("wh1", "Wh1Face", f, c), self.o(e, f))
        D = _Triplets(self.dim("wh3"), self.dim("wh2"))
        for e in m.interior_edges:
            for v in m.edges[e]:
                if m.vertex_interior[v]:
                    for c in range(3):
                        D.add(self.idx("wh3", "Wh3Vertex", v, c), self.idx("wh2", "Wh2Edge", e, c), incidence((v,), m.edges[e]))
        return [G.build(), C.build(), D.build()]

    def wh_row(self) -> CochainComplex:
        ids = ["wh0", "wh1", "wh2", "wh3"]
        return CochainComplex("wh_row", [self.dim(s) for s in ids], list(self.wh_maps), ids)

    def whitney(self) -> CochainComplex:
        ids = ["whitney0", "whitney1", "whitney2", "whitney3"]
        return CochainComplex("whitney", [self.dim(s) for s in ids], absolute_coboundary_matrices(self.mesh), ids)

    # ------------------------------------------------------------------
    # Regge and Nedelec complexes

    @cached_property
    def regge_def(self) -> SparseMat:
        """Symmetric gradient of vector Lagrange fields, as Regge edge moments ``(u1 - u0) . t``."""
        m = self.mesh
        T = _Triplets(self.dim("reg"), self.dim("lag"))
        for e, (a, b) in enumerate(m.edges):
            t = self.fr.edge_t[e]
            r = self.idx("reg", "RegEdge", e)
            for c in range(3):
                T.add(r, self.idx("lag", "LagNode", b, c), t[c])
                T.add(r, self.idx("lag", "LagNode", a, c), -t[c])
        return T.build()

    def _jump_phi(self, vertex_forms: Callable[[int, int], list[dict]], ncols: int, where: str) -> SparseMat:
        """Phi coordinates of ``sum_K s(f,K) w_K`` on each interior face."""
        T = _Triplets(self.dim("phi"), ncols)
        for f in self.mesh.interior_faces:
            jumps = []
            for v in self.mesh.faces[f]:
                J = [{} for _ in range(3)]
                for k in self.mesh.face_tets[f]:
                    w = vertex_forms(k, v)
                    for i in range(3):
                        _lf_add(J[i], w[i], self.s(f, k))
                jumps.append(J)
            for j, form in enumerate(self.phi_coords_from_vertex_jumps(f, jumps, where)):
                T.add_form(self.idx("phi", "PhiNormal", f, j), form)
        return T.build()

    @cached_property
    def nedc_def_phi(self) -> SparseMat:
        return self._jump_phi(self.nedc_vertex_forms, self.dim("nedc"), "jump of a full-linear field")

    @cached_property
    def nedc_def_reg(self) -> SparseMat:
        """Regge part of the deformation: the derivative moment of each edge."""
        T = _Triplets(self.dim("reg"), self.dim("nedc"))
        for e in range(len(self.mesh.edges)):
            T.add(self.idx("reg", "RegEdge", e), self.idx("nedc", "NedCEdge", e, 1), 1)
        return T.build()

    @cached_property
    def lift(self) -> SparseMat:
        """Reg -> Ned^c: zero mean, derivative moment equal to the Regge moment."""
        T = _Triplets(self.dim("nedc"), self.dim("reg"))
        for e in range(len(self.mesh.edges)):
            T.add(self.idx("nedc", "NedCEdge", e, 1), self.idx("reg", "RegEdge", e), 1)
        return T.build()

    @cached_property
    def correction(self) -> SparseMat:
        """Reg -> Phi: Phi part of the deformation of the lift."""
        return self.nedc_def_phi @ self.lift

    @cached_property
    def inc_phi_x2(self) -> SparseMat:
        """Phi -> X^2 through the rigid-motion boundary row."""
        return self.x_rm_maps[1] @ self.emb_phi

    @cached_property
    def regge_inc(self) -> SparseMat:
        """Reg -> (Reg_0)'.

        The rigid-motion boundary of the correction leaves, on each interior
        edge, a rigid motion vanishing on that edge, i.e. ``-lambda t x (x - m)``;
        ``lambda`` is the inc coefficient.
        """
        R = (self.inc_phi_x2 @ self.correction).T
        m = self.mesh
        T = _Triplets(self.dim("reg0p"), self.dim("reg"))
        for col, r in R.rows.items():
            by_edge: dict[int, list[Fraction]] = {}
            for i, v in r.items():
                e = self.space("x2").dofs[i].simplex
                by_edge.setdefault(e, [ZERO] * 6)[i % 6] = v
            for e, c in by_edge.items():
                a, b = tuple(c[:3]), tuple(c[3:])
                t = self.fr.edge_t[e]
                mid = m.midpoint(m.edges[e])
                if _nonzero(sa.cross(b, t)) or _nonzero(sa.add(a, sa.cross(b, mid))):
                    raise DecompositionResidual("inc correction", f"edge {m.edges[e]} residual {c}")
                lam = sa.dot(b, t) / sa.dot(t, t)
                T.add(self.idx("reg0p", "RegDualEdge", e), col, -lam)
        return T.build()

    @cached_property
    def regge_div(self) -> SparseMat:
        m = self.mesh
        T = _Triplets(self.dim("lag0p"), self.dim("reg0p"))
        for e in m.interior_edges:
            t = self.fr.edge_t[e]
            for v in m.edges[e]:
                if m.vertex_interior[v]:
                    O = incidence((v,), m.edges[e])
                    for c in range(3):
                        T.add(self.idx("lag0p", "LagDualVertex", v, c), self.idx("reg0p", "RegDualEdge", e), O * t[c])
        return T.build()

    def regge(self) -> CochainComplex:
        ids = ["lag", "reg", "reg0p", "lag0p"]
        return CochainComplex("regge", [self.dim(s) for s in ids], [self.regge_def, self.regge_inc, self.regge_div], ids)

    @cached_property
    def xhat_div(self) -> SparseMat:
        return self.x_rm_maps[2] @ self.emb_xhat2

    def nedc(self) -> CochainComplex:
        D = vstack([self.nedc_def_reg, self.nedc_def_phi])
        inc_reg = self.to_xhat2(self.emb_reg0p @ self.regge_inc, "inc of Regge part")
        inc_phi = self.to_xhat2(self.inc_phi_x2, "inc of Phi part")
        ids = ["nedc", "reg_phi", "xhat2", "x3"]
        return CochainComplex("nedc", [self.dim(s) for s in ids], [D, hstack([inc_reg, inc_phi]), self.xhat_div], ids)

    @cached_property
    def ned_to_x0(self) -> SparseMat:
        T = _Triplets(self.dim("x0"), self.dim("ned"))
        for k in range(len(self.mesh.tets)):
            for a, form in enumerate(self.ned_rm_forms(k)):
                T.add_form(self.idx("x0", "Xcell", k, a), form)
        return T.build()

    @cached_property
    def ned_def(self) -> SparseMat:
        def vertex_forms(k, v):
            R = sa.rm_value_rows(self.x(v))
            coords = self.ned_rm_forms(k)
            return [_lf_vec(coords, R[i]) for i in range(3)]

        return self._jump_phi(vertex_forms, self.dim("ned"), "jump of a Nedelec field")

    def ned(self) -> CochainComplex:
        ids = ["ned", "phi", "xhat2", "x3"]
        inc = self.to_xhat2(self.inc_phi_x2, "inc of Phi part")
        return CochainComplex("ned", [self.dim(s) for s in ids], [self.ned_def, inc, self.xhat_div], ids)

    # ------------------------------------------------------------------
    # auxiliary complexes and chain maps

    def _edge_normal_coords(self, e: int, v, where: str) -> list[Fraction]:
        """Coordinates of a vector normal to edge ``e`` in its frame ``(n1, n2)``."""
        return decompose_vector(v, self.fr.edge_n[e], where)

    def rm_aux(self) -> CochainComplex:
        m = self.mesh
        D0 = _Triplets(self.dim("rmf"), self.dim("x0"))
        D1 = _Triplets(self.dim("rme"), self.dim("rmf"))
        from .spaces import face_edges

        for f in m.interior_faces:
            edges = face_edges(m, f)
            for i, e in enumerate(edges):
                t = self.fr.edge_t[e]
                row = list(t) + list(sa.cross(m.midpoint(m.edges[e]), t))
                r = self.idx("rmf", "RMFace", f, i)
                for k in m.face_tets[f]:
                    for a in range(6):
                        D0.add(r, self.idx("x0", "Xcell", k, a), self.s(f, k) * row[a])
                if m.edge_interior[e]:
                    D1.add(self.idx("rme", "RMEdge", e), r, incidence(m.edges[e], m.faces[f]))
        maps = [D0.build(), D1.build(), SparseMat.zeros(0, self.dim("rme"))]
        ids = ["x0", "rmf", "rme", "zero"]
        return CochainComplex("rm_aux", [self.dim(s) for s in ids], maps, ids)

    def g_map(self) -> ChainMap:
        """x_rm -> rm_aux: tangential traces on face edges and on edges."""
        m = self.mesh
        from .spaces import face_edges

        G1 = _Triplets(self.dim("rmf"), self.dim("x1"))
        for f in m.interior_faces:
            for i, e in enumerate(face_edges(m, f)):
                t = self.fr.edge_t[e]
                row = list(t) + list(sa.cross(m.midpoint(m.edges[e]), t))
                for a in range(6):
                    G1.add(self.idx("rmf", "RMFace", f, i), self.idx("x1", "Phi1Face", f, a), row[a])
        G2 = _Triplets(self.dim("rme"), self.dim("x2"))
        for e in m.interior_edges:
            t = self.fr.edge_t[e]
            row = list(t) + list(sa.cross(m.midpoint(m.edges[e]), t))
            for a in range(6):
                G2.add(self.idx("rme", "RMEdge", e), self.idx("x2", "Phi2Edge", e, a), row[a])
        maps = [SparseMat.identity(self.dim("x0")), G1.build(), G2.build(), SparseMat.zeros(0, self.dim("x3"))]
        return ChainMap("g", "x_rm", "rm_aux", maps)

    def _normal_face_to_edge(self, tgt: str, kind: str, src: str, src_kind: str, per_vertex: bool, sign: Callable) -> SparseMat:
        """Restriction of normal face data to the edges of the face, in edge-normal coordinates."""
        m = self.mesh
        T = _Triplets(self.dim(tgt), self.dim(src))
        for f in m.interior_faces:
            n = self.fr.face_n[f]
            for e in self._interior_face_edges(f):
                al, be = self._edge_normal_coords(e, n, "face normal on an edge")
                sg = sign(e, f)
                if per_vertex:
                    for j, v in enumerate(m.faces[f]):
                        if v not in m.edges[e]:
                            continue
                        kk = m.edges[e].index(v)
                        c = self.idx(src, src_kind, f, j)
                        T.add(self.idx(tgt, kind, e, 2 * kk), c, sg * al)
                        T.add(self.idx(tgt, kind, e, 2 * kk + 1), c, sg * be)
                else:
                    c = self.idx(src, src_kind, f)
                    T.add(self.idx(tgt, kind, e, 0), c, sg * al)
                    T.add(self.idx(tgt, kind, e, 1), c, sg * be)
        return T.build()

    def _interior_face_edges(self, f: int) -> list[int]:
        from .spaces import face_edges

        return [e for e in face_edges(self.mesh, f) if self.mesh.edge_interior[e]]

    def _edge_normals_to_vertex(self, tgt: str, kind: str, src: str, src_kind: str, per_vertex: bool) -> SparseMat:
        m = self.mesh
        T = _Triplets(self.dim(tgt), self.dim(src))
        for e in m.interior_edges:
            for kk, v in enumerate(m.edges[e]):
                if not m.vertex_interior[v]:
                    continue
                O = incidence((v,), m.edges[e])
                for i in range(2):
                    n = self.fr.edge_n[e][i]
                    c = self.idx(src, src_kind, e, 2 * kk + i if per_vertex else i)
                    for a in range(3):
                        T.add(self.idx(tgt, kind, v, a), c, O * n[a])
        return T.build()

    def p1n(self) -> CochainComplex:
        # Phi and P1 normal face coordinates coincide
        D0 = self.nedc_def_phi
        D1 = self._normal_face_to_edge("p1n_e", "P1nEdge", "p1n_f", "P1nFace", True, lambda e, f: incidence(self.mesh.edges[e], self.mesh.faces[f]))
        D2 = self._edge_normals_to_vertex("p1n_v", "P1nVertex", "p1n_e", "P1nEdge", True)
        ids = ["nedc", "p1n_f", "p1n_e", "p1n_v"]
        return CochainComplex("p1n", [self.dim(s) for s in ids], [D0, D1, D2], ids)

    def j_map(self) -> ChainMap:
        """nedc -> p1n: drop the Regge part, restrict rigid motions to P1 normal data."""
        m = self.mesh
        J1 = hstack([SparseMat.zeros(self.dim("p1n_f"), self.dim("reg")), SparseMat.identity(self.dim("phi"))])
        J2 = _Triplets(self.dim("p1n_e"), self.dim("xhat2"))
        for e, (basis, _, _) in self.xhat_bases.items():
            for j, p in enumerate(basis):
                rm = sa.RigidMotion.from_coords(p)
                for kk, v in enumerate(m.edges[e]):
                    al, be = self._edge_normal_coords(e, rm(self.x(v)), "reduced rigid motion at an edge end")
                    c = self.idx("xhat2", "XHat2", e, j)
                    J2.add(self.idx("p1n_e", "P1nEdge", e, 2 * kk), c, al)
                    J2.add(self.idx("p1n_e", "P1nEdge", e, 2 * kk + 1), c, be)
        J3 = _Triplets(self.dim("p1n_v"), self.dim("x3"))
        for v in m.interior_vertices:
            R = sa.rm_value_rows(self.x(v))
            for i in range(3):
                for a in range(6):
                    J3.add(self.idx("p1n_v", "P1nVertex", v, i), self.idx("x3", "Phi3Vertex", v, a), R[i][a])
        return ChainMap("j", "nedc", "p1n", [SparseMat.identity(self.dim("nedc")), J1, J2.build(), J3.build()])

    def _grad_jump_normal(self, tgt: str, kind: str, sign: int) -> SparseMat:
        """``sign * [grad u] . n / n . n`` on interior faces for scalar P1 ``u``."""
        m = self.mesh
        T = _Triplets(self.dim(tgt), self.dim("slag"))
        for f in m.interior_faces:
            n = self.fr.face_n[f]
            t1, t2 = self.fr.face_t[f]
            J = [{} for _ in range(3)]
            for k in m.face_tets[f]:
                g = self.slag_grad_forms(k)
                for i in range(3):
                    _lf_add(J[i], g[i], self.s(f, k))
            if _lf_vec(J, t1) or _lf_vec(J, t2):
                raise DecompositionResidual("gradient jump", f"tangential part on face {m.faces[f]}")
            T.add_form(self.idx(tgt, kind, f), _lf_vec(J, n), Fraction(sign, 1) / sa.dot(n, n))
        return T.build()

    def p0n(self) -> CochainComplex:
        D0 = self._grad_jump_normal("p0n_f", "P0nFace", 1)
        D1 = self._normal_face_to_edge("p0n_e", "P0nEdge", "p0n_f", "P0nFace", False, lambda e, f: incidence(self.mesh.edges[e], self.mesh.faces[f]))
        D2 = self._edge_normals_to_vertex("p0n_v", "P0nVertex", "p0n_e", "P0nEdge", False)
        ids = ["slag", "p0n_f", "p0n_e", "p0n_v"]
        return CochainComplex("p0n", [self.dim(s) for s in ids], [D0, D1, D2], ids)

    def hessian(self) -> CochainComplex:
        """Distributional hess-curl-div with normal-normal face, normal-tangent edge and vertex data."""
        D0 = self._grad_jump_normal("hess_v1", "HessV1", -1)
        D1 = self._normal_face_to_edge("hess_v2", "HessV2", "hess_v1", "HessV1", False, self.o)
        D2 = self._edge_normals_to_vertex("hess_v3", "HessV3", "hess_v2", "HessV2", False)
        ids = ["slag", "hess_v1", "hess_v2", "hess_v3"]
        return CochainComplex("hessian", [self.dim(s) for s in ids], [D0, D1, D2], ids)

    def hess_geom(self) -> ChainMap:
        """hessian -> p0n; the signs absorb ``o(e,f) = -O(e,f)`` and the outward jump convention."""
        signs = (-1, 1, -1, -1)
        ids = ("slag", "hess_v1", "hess_v2", "hess_v3")
        return ChainMap("hess_geom", "hessian", "p0n", [SparseMat.identity(self.dim(s), c) for s, c in zip(ids, signs)])

    # ------------------------------------------------------------------
    # V row: Lagrange -> Regge + cell skew -> face matrices -> edge vectors

    def vh2_basis(self, f: int) -> list:
        n = self.fr.face_n[f]
        t1, t2 = self.fr.face_t[f]
        return [sa.outer(n, t1), sa.outer(n, t2), sa.msub(sa.iota(sa.dot(n, n)), sa.outer(n, n))]

    def _vh1_cell_forms(self, k: int) -> list[list[dict]]:
        """Constant matrix value on tet ``k`` of a V^1 element, as forms."""
        U = [[{} for _ in range(3)] for _ in range(3)]
        for e, B in self.regge_local_basis(k).items():
            c = self.idx("vh1", "RegEdge", e)
            for i in range(3):
                for j in range(3):
                    if B[i][j]:
                        U[i][j][c] = B[i][j]
        for a in range(3):
            W = sa.mskw(tuple(Fraction(int(i == a)) for i in range(3)))
            c = self.idx("vh1", "CellSkw", k, a)
            for i in range(3):
                for j in range(3):
                    if W[i][j]:
                        U[i][j][c] = W[i][j]
        return U

    @staticmethod
    def _split_matrix_forms(P: list[list[dict]]) -> dict:
        """Column -> 3x3 matrix of coefficients."""
        out: dict = {}
        for i in range(3):
            for j in range(3):
                for c, v in P[i][j].items():
                    out.setdefault(c, [[ZERO] * 3 for _ in range(3)])[i][j] = v
        return {c: tuple(tuple(r) for r in M) for c, M in out.items()}

    @cached_property
    def vh_grad(self) -> SparseMat:
        T = _Triplets(self.dim("vh1"), self.dim("lag"))
        D = self.regge_def
        for i, r in D.rows.items():
            for j, v in r.items():
                T.add(self.idx("vh1", "RegEdge", self.space("reg").dofs[i].simplex), j, v)
        for k in range(len(self.mesh.tets)):
            G = self.lag_grad_forms(k)
            half = Fraction(1, 2)
            skew = [(G[2][1], G[1][2]), (G[0][2], G[2][0]), (G[1][0], G[0][1])]
            for a, (p, q) in enumerate(skew):
                form = dict(p)
                _lf_add(form, q, -1)
                T.add_form(self.idx("vh1", "CellSkw", k, a), form, half)
        return T.build()

    def _face_payload_to_vh2(self, f: int, A, where: str) -> list[Fraction]:
        return decompose_matrix(A, self.vh2_basis(f), where)

    @cached_property
    def vh_curl(self) -> SparseMat:
        """Row-wise curl: face payload ``sum_K s(f,K) u_K x n_f``."""
        m = self.mesh
        T = _Triplets(self.dim("vh2"), self.dim("vh1"))
        for f in m.interior_faces:
            n = self.fr.face_n[f]
            P = [[{} for _ in range(3)] for _ in range(3)]
            for k in m.face_tets[f]:
                U = self._vh1_cell_forms(k)
                for i in range(3):
                    # (u x n)_i = u_{i,i+1} n_{i+2} - u_{i,i+2} n_{i+1}
                    for j in range(3):
                        j1, j2 = (j + 1) % 3, (j + 2) % 3
                        _lf_add(P[i][j], U[i][j1], self.s(f, k) * n[j2])
                        _lf_add(P[i][j], U[i][j2], -self.s(f, k) * n[j1])
            rows = [self.idx("vh2", "Vh2FaceNT", f, 0), self.idx("vh2", "Vh2FaceNT", f, 1), self.idx("vh2", "Vh2FaceTT", f, 0)]
            for c, A in self._split_matrix_forms(P).items():
                for r, x in zip(rows, self._face_payload_to_vh2(f, A, "face curl payload")):
                    T.add(r, c, x)
        return T.build()

    def _vh2_payloads(self):
        for f in self.mesh.interior_faces:
            rows = [self.idx("vh2", "Vh2FaceNT", f, 0), self.idx("vh2", "Vh2FaceNT", f, 1), self.idx("vh2", "Vh2FaceTT", f, 0)]
            yield from ((f, c, B) for c, B in zip(rows, self.vh2_basis(f)))

    @cached_property
    def vh_div(self) -> SparseMat:
        """Row-wise divergence of face payloads ``A`` with ``A n = 0``: edge vector ``-o(e,f) A (t_e x n_f)``."""
        T = _Triplets(self.dim("vh3"), self.dim("vh2"))
        for f, c, A in self._vh2_payloads():
            n = self.fr.face_n[f]
            nn = sa.dot(n, n)
            for e in self._interior_face_edges(f):
                t = self.fr.edge_t[e]
                v = sa.smul(Fraction(-self.o(e, f)) / nn, sa.matvec(A, sa.cross(t, n)))
                for i, x in enumerate(self._edge_normal_coords(e, v, "edge divergence payload")):
                    T.add(self.idx("vh3", "Vh3EdgeN", e, i), c, x)
        return T.build()

    def vh_row(self) -> CochainComplex:
        ids = ["lag", "vh1", "vh2", "vh3"]
        return CochainComplex("vh_row", [self.dim(s) for s in ids], [self.vh_grad, self.vh_curl, self.vh_div], ids)

    # ------------------------------------------------------------------
    # algebraic couplings W -> V and their pseudo-inverses

    @cached_property
    def S_blocks(self) -> list[SparseMat]:
        m = self.mesh
        S0 = _Triplets(self.dim("vh1"), self.dim("wh0"))
        for k in range(len(m.tets)):
            for a in range(3):
                # -mskw(c)
                S0.add(self.idx("vh1", "CellSkw", k, a), self.idx("wh0", "Wh0Cell", k, a), -1)
        S1 = _Triplets(self.dim("vh2"), self.dim("wh1"))
        for f in m.interior_faces:
            n = self.fr.face_n[f]
            rows = [self.idx("vh2", "Vh2FaceNT", f, 0), self.idx("vh2", "Vh2FaceNT", f, 1), self.idx("vh2", "Vh2FaceTT", f, 0)]
            for a in range(3):
                ea = tuple(Fraction(int(i == a)) for i in range(3))
                for r, x in zip(rows, self._face_payload_to_vh2(f, sa.S(sa.outer(ea, n)), "S on a face")):
                    S1.add(r, self.idx("wh1", "Wh1Face", f, a), x)
        S2 = _Triplets(self.dim("vh3"), self.dim("wh2"))
        for e in m.interior_edges:
            t = self.fr.edge_t[e]
            for a in range(3):
                ea = tuple(Fraction(int(i == a)) for i in range(3))
                v = sa.smul(2, sa.vskw(sa.outer(ea, t)))
                for i, x in enumerate(self._edge_normal_coords(e, v, "2 vskw on an edge")):
                    S2.add(self.idx("vh3", "Vh3EdgeN", e, i), self.idx("wh2", "Wh2Edge", e, a), x)
        return [S0.build(), S1.build(), S2.build()]

    @cached_property
    def T_blocks(self) -> list[SparseMat]:
        """Pseudo-inverses: ``-vskw`` on cells, ``S^{-1}`` on faces, ``mskw/2`` projected on edges."""
        m = self.mesh
        T1 = _Triplets(self.dim("wh0"), self.dim("vh1"))
        for k in range(len(m.tets)):
            for a in range(3):
                T1.add(self.idx("wh0", "Wh0Cell", k, a), self.idx("vh1", "CellSkw", k, a), -1)
        T2 = _Triplets(self.dim("wh1"), self.dim("vh2"))
        for f, c, A in self._vh2_payloads():
            n = self.fr.face_n[f]
            B = sa.Sinv(A)
            w = sa.smul(1 / sa.dot(n, n), sa.matvec(B, n))
            if _nonzero(sa.msub(B, sa.outer(w, n))):
                raise DecompositionResidual("inverse of S on a face", B)
            for a in range(3):
                T2.add(self.idx("wh1", "Wh1Face", f, a), c, w[a])
        T3 = _Triplets(self.dim("wh2"), self.dim("vh3"))
        for e, c, M in self._vh3_T_payloads():
            t = self.fr.edge_t[e]
            w = sa.smul(1 / sa.dot(t, t), sa.matvec(M, t))
            for a in range(3):
                T3.add(self.idx("wh2", "Wh2Edge", e, a), c, w[a])
        return [T1.build(), T2.build(), T3.build()]

    def _vh3_T_payloads(self):
        for e in self.mesh.interior_edges:
            for i in range(2):
                M = sa.mscale(Fraction(1, 2), sa.mskw(self.fr.edge_n[e][i]))
                yield e, self.idx("vh3", "Vh3EdgeN", e, i), M

    def T3_residuals(self) -> list[dict]:
        """Edge payloads of ``mskw/2`` outside ``span{c (x) t_e}`` (dropped by the projection)."""
        out = []
        for e, c, M in self._vh3_T_payloads():
            t = self.fr.edge_t[e]
            w = sa.smul(1 / sa.dot(t, t), sa.matvec(M, t))
            R = sa.msub(M, sa.outer(w, t))
            if _nonzero(R):
                out.append({"edge": self.mesh.edges[e], "dof": c, "residual": R})
        return out

    # Block signs of [[d_V, eps_k S^k], [0, d_W]] that make the block operator a complex.
    TWIST_SIGNS = (1, -1, 1)

    def twisted(self) -> CochainComplex:
        dV = [self.vh_grad, self.vh_curl, self.vh_div]
        dW = self.wh_maps
        maps = []
        for k in range(3):
            wk, vk1 = self.dim(f"wh{k}"), self.dim(f"vh{k + 1}")
            Z = SparseMat.zeros(self.dim(f"wh{k + 1}"), self.dim("lag" if k == 0 else f"vh{k}"))
            maps.append(block([[dV[k], self.S_blocks[k].scale(self.TWIST_SIGNS[k])], [Z, dW[k]]]))
            assert maps[-1].shape[1] == (self.dim("lag" if k == 0 else f"vh{k}") + wk) and vk1 >= 0
        dims = [self.dim("lag") + self.dim("wh0")] + [self.dim(f"vh{k}") + self.dim(f"wh{k}") for k in (1, 2, 3)]
        return CochainComplex("twisted", dims, maps, ["twisted0", "twisted1", "twisted2", "twisted3"])

    def complex(self, complex_id: str) -> CochainComplex:
        if complex_id not in COMPLEX_IDS and complex_id != "rm_simplicial":
            raise UnknownComplex(complex_id)
        return getattr(self, complex_id)()

    def chain_maps(self) -> dict[str, ChainMap]:
        return {"kappa": self.kappa(), "g": self.g_map(), "j": self.j_map(), "hess_geom": self.hess_geom()}


class UnknownComplex(KeyError):
    pass


COMPLEX_IDS = (
    "regge", "twisted", "x_rm", "ned", "nedc", "wh_row", "vh_row",
    "p0n", "hessian", "rm_aux", "p1n", "whitney",
)


def assemble(complex_id: str, mesh: SimplicialComplex3) -> CochainComplex:
    return Assembler(mesh).complex(complex_id)


def _fmt(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def export_matrix_market(M: SparseMat, comment: str = "") -> str:
    """MatrixMarket-style coordinate text with exact rational entries (1-based ``row col p/q``)."""
    lines = ["%%MatrixMarket matrix coordinate rational general"]
    if comment:
        lines += [f"% {c}" for c in comment.splitlines()]
    entries = sorted(M.items())
    lines.append(f"{M.nrows} {M.ncols} {len(entries)}")
    lines += [f"{i + 1} {j + 1} {_fmt(v)}" for i, j, v in entries]
    return "\n".join(lines) + "\n"


def import_matrix_market(text: str) -> SparseMat:
    rows = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("%")]
    nr, nc, nnz = (int(x) for x in rows[0].split())
    trip = []
    for ln in rows[1:1 + nnz]:
        i, j, v = ln.split()
        trip.append((int(i) - 1, int(j) - 1, Fraction(v)))
    return SparseMat.from_triplets(nr, nc, trip)


def assemble_complex(complex_id: str, mesh: SimplicialComplex3) -> CochainComplex:
    return assemble(complex_id, mesh)


def assemble_chainmap(map_id: str, mesh: SimplicialComplex3) -> ChainMap:
    maps = Assembler(mesh).chain_maps()
    if map_id not in maps:
        raise KeyError(f"unknown chain map {map_id!r}; known: {sorted(maps)}")
    return maps[map_id]


def assemble_bgg_maps(mesh: SimplicialComplex3) -> tuple[ChainMap, ChainMap]:
    """Couplings ``S^k: W^k -> V^{k+1}`` and pseudo-inverses ``T^{k+1}: V^{k+1} -> W^k``."""
    a = Assembler(mesh)
    return ChainMap("S", "wh_row", "vh_row", a.S_blocks), ChainMap("T", "vh_row", "wh_row", a.T_blocks)


def lift_L(asm: Assembler, sigma: Sequence) -> list[Fraction]:
    """Full-linear Nedelec field with zero mean moments whose deformation has Regge part ``sigma``."""
    return asm.lift.apply(sigma)


def correction_K(asm: Assembler, sigma: Sequence) -> list[Fraction]:
    """``Def L sigma - sigma``, a purely normal face term (Phi coordinates)."""
    return asm.correction.apply(sigma)

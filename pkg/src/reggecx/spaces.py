"""Enumerated bases of the finite element and distributional spaces.

Every space is a :class:`DofSpace`: an ordered list of :class:`Dof` entries
``(kind, simplex, index)``.  ``simplex`` indexes the mesh table matching the
kind (vertex id, edge, face or tet index); ``index`` is a 0-based component
or local basis number.

Conventions used throughout (all frames are the scaled rational frames of
:func:`reggecx.mesh.frames`):

* Face deltas integrate against the area measure divided by ``|n_f|``, so a
  payload containing one scaled normal ``n_f`` equals the unit-normal payload
  against the plain area measure.  Edge deltas integrate over the unit
  parameter interval, so ``c (x) t_e`` with scaled ``t_e`` equals the unit
  tangent payload against arc length.
* Rigid motions are stored by coordinates ``(a, b)``, ``p(x) = a + b x x``,
  in the basis :func:`reggecx.smallalg.rm_basis`.
* ``P1`` data on a simplex are given by values at its (sorted) vertices.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

from . import smallalg as sa
from .mesh import FrameSet, SimplicialComplex3
from .sparse import SparseMat, nullspace


class UnknownSpace(KeyError):
    pass


class Dof(NamedTuple):
    kind: str
    simplex: int
    index: int = 0


@dataclass
class DofSpace:
    space_id: str
    dofs: list[Dof]
    _lookup: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._lookup = {d: i for i, d in enumerate(self.dofs)}

    @property
    def dim(self) -> int:
        return len(self.dofs)

    def __len__(self) -> int:
        return len(self.dofs)

    def index(self, dof: Dof) -> int:
        return self._lookup[dof]

    def get(self, kind: str, simplex: int, index: int = 0) -> int | None:
        return self._lookup.get(Dof(kind, simplex, index))

    @staticmethod
    def concat(space_id: str, parts: Sequence["DofSpace"]) -> "DofSpace":
        return DofSpace(space_id, [d for p in parts for d in p.dofs])


def _per(kind: str, simplices: Sequence[int], n: int) -> list[Dof]:
    return [Dof(kind, s, i) for s in simplices for i in range(n)]


# space id -> (description, builder(mesh) -> list[Dof])
def _builders(m: SimplicialComplex3):
    V, E, F, K = m.used_vertices, range(len(m.edges)), range(len(m.faces)), range(len(m.tets))
    V0, E0, F0 = m.interior_vertices, m.interior_edges, m.interior_faces
    return {
        "lag": lambda: _per("LagNode", V, 3),
        "slag": lambda: _per("ScalarLagNode", V, 1),
        "reg": lambda: _per("RegEdge", E, 1),
        "reg0p": lambda: _per("RegDualEdge", E0, 1),
        "lag0p": lambda: _per("LagDualVertex", V0, 3),
        "ned": lambda: _per("NedEdge", E, 1),
        # index 0: value moment, 1: derivative moment
        "nedc": lambda: _per("NedCEdge", E, 2),
        "vh0": lambda: _per("LagNode", V, 3),
        "vh1": lambda: _per("RegEdge", E, 1) + _per("CellSkw", K, 3),
        "vh2": lambda: [Dof(k, f, i) for f in F0 for k, i in (("Vh2FaceNT", 0), ("Vh2FaceNT", 1), ("Vh2FaceTT", 0))],
        "vh3": lambda: _per("Vh3EdgeN", E0, 2),
        "wh0": lambda: _per("Wh0Cell", K, 3),
        "wh1": lambda: _per("Wh1Face", F0, 3),
        "wh2": lambda: _per("Wh2Edge", E0, 3),
        "wh3": lambda: _per("Wh3Vertex", V0, 3),
        "x0": lambda: _per("Xcell", K, 6),
        "x1": lambda: _per("Phi1Face", F0, 6),
        "x2": lambda: _per("Phi2Edge", E0, 6),
        "x3": lambda: _per("Phi3Vertex", V0, 6),
        "phi": lambda: _per("PhiNormal", F0, 3),
        "xhat2": lambda: _per("XHat2", E0, 5),
        "rmf": lambda: _per("RMFace", F0, 3),
        "rme": lambda: _per("RMEdge", E0, 1),
        "p1n_f": lambda: _per("P1nFace", F0, 3),
        "p1n_e": lambda: _per("P1nEdge", E0, 4),
        "p1n_v": lambda: _per("P1nVertex", V0, 3),
        "p0n_f": lambda: _per("P0nFace", F0, 1),
        "p0n_e": lambda: _per("P0nEdge", E0, 2),
        "p0n_v": lambda: _per("P0nVertex", V0, 3),
        "hess_v1": lambda: _per("HessV1", F0, 1),
        "hess_v2": lambda: _per("HessV2", E0, 2),
        "hess_v3": lambda: _per("HessV3", V0, 3),
        "whitney0": lambda: _per("Whitney0", V, 1),
        "whitney1": lambda: _per("Whitney1", E, 1),
        "whitney2": lambda: _per("Whitney2", F, 1),
        "whitney3": lambda: _per("Whitney3", K, 1),
        "zero": lambda: [],
    }


def enumerate_space(space_id: str, mesh: SimplicialComplex3) -> DofSpace:
    if space_id == "reg_phi":
        return DofSpace.concat("reg_phi", [enumerate_space("reg", mesh), enumerate_space("phi", mesh)])
    if space_id.startswith("twisted"):
        k = space_id[-1]
        return DofSpace.concat(space_id, [enumerate_space(f"vh{k}", mesh), enumerate_space(f"wh{k}", mesh)])
    b = _builders(mesh)
    if space_id not in b:
        raise UnknownSpace(space_id)
    return DofSpace(space_id, b[space_id]())


def _space_ids() -> tuple[str, ...]:
    from .mesh import generate_mesh

    return tuple(_builders(generate_mesh("tet")).keys()) + ("reg_phi", "twisted0", "twisted1", "twisted2", "twisted3")


SPACE_IDS = _space_ids()


def expected_dimension(space_id: str, mesh: SimplicialComplex3) -> int:
    """Closed-form dimension of a space from simplex counts."""
    c = mesh.counts
    V, E, F, K, V0, E0, F0 = (c[k] for k in ("V", "E", "F", "K", "V0", "E0", "F0"))
    table = {
        "lag": 3 * V, "slag": V, "reg": E, "reg0p": E0, "lag0p": 3 * V0, "ned": E, "nedc": 2 * E,
        "vh0": 3 * V, "vh1": E + 3 * K, "vh2": 3 * F0, "vh3": 2 * E0,
        "wh0": 3 * K, "wh1": 3 * F0, "wh2": 3 * E0, "wh3": 3 * V0,
        "x0": 6 * K, "x1": 6 * F0, "x2": 6 * E0, "x3": 6 * V0,
        "phi": 3 * F0, "xhat2": 5 * E0, "rmf": 3 * F0, "rme": E0,
        "p1n_f": 3 * F0, "p1n_e": 4 * E0, "p1n_v": 3 * V0,
        "p0n_f": F0, "p0n_e": 2 * E0, "p0n_v": 3 * V0,
        "hess_v1": F0, "hess_v2": 2 * E0, "hess_v3": 3 * V0,
        "whitney0": V, "whitney1": E, "whitney2": F, "whitney3": K, "zero": 0,
        "reg_phi": E + 3 * F0,
    }
    if space_id.startswith("twisted"):
        k = space_id[-1]
        return table[f"vh{k}"] + table[f"wh{k}"]
    if space_id not in table:
        raise UnknownSpace(space_id)
    return table[space_id]


# ----------------------------------------------------------------------
# local bases built from rigid motions


def face_edges(mesh: SimplicialComplex3, f: int) -> list[int]:
    return [mesh.edge_index[e] for e in itertools.combinations(mesh.faces[f], 2)]


def xhat2_basis(mesh: SimplicialComplex3, e: int) -> tuple[list[list[Fraction]], int, list[int]]:
    """Basis of ``{p in RM : p . t_e = 0 on e}``.

    The single constraint ``a . t + b . (x0 x t) = 0`` (``x0`` the midpoint) is
    solved by exact nullspace.  Returns ``(basis, pivot, free)``: coordinates
    of a member ``p`` in this basis are its entries at ``free``.
    """
    t = mesh.edge_tangent(e)
    x0 = mesh.midpoint(mesh.edges[e])
    row = list(t) + list(sa.cross(x0, t))
    basis = nullspace(SparseMat.from_dense([row]))
    piv = next(i for i, c in enumerate(row) if c != 0)
    free = [i for i in range(6) if i != piv]
    # nullspace() returns vectors with unit entries on the free columns in order
    return basis, piv, free


def phi_basis(mesh: SimplicialComplex3, f: int) -> list[list[Fraction]]:
    """RM coordinates of ``p_j`` with ``p_j|_f = lambda_j n_f`` (``lambda_j`` barycentric)."""
    n = mesh.face_normal(f)
    verts = mesh.faces[f]
    rows = []
    for v in verts:
        rows += sa.rm_value_rows(mesh.vertices[v])
    M = SparseMat.from_dense(rows)
    from .sparse import solve

    out = []
    for j in range(3):
        rhs = []
        for i in range(3):
            rhs += list(n) if i == j else [0, 0, 0]
        x = solve(M, rhs)
        assert x is not None, "normal field on a face must be a rigid motion trace"
        out.append(x)
    return out


def reg0p_rm(mesh: SimplicialComplex3, e: int) -> list[Fraction]:
    """RM coordinates of ``t_e x (x - m_e)``, which stands for the tangential-tangential edge delta."""
    t = mesh.edge_tangent(e)
    m = mesh.midpoint(mesh.edges[e])
    a = sa.smul(-1, sa.cross(t, m))
    return list(a) + list(t)


# ----------------------------------------------------------------------
# payloads


def payload(dof: Dof, mesh: SimplicialComplex3, fr: FrameSet):
    """``(simplex vertices, payload, description)`` of a basis functional."""
    k, s, i = dof
    axis = tuple(Fraction(int(j == i)) for j in range(3))
    if k in ("LagNode", "LagDualVertex", "Wh3Vertex", "P1nVertex", "P0nVertex", "HessV3"):
        return (s,), axis, "vertex delta with vector payload"
    if k == "ScalarLagNode":
        return (s,), Fraction(1), "vertex evaluation"
    if k in ("Whitney0", "Whitney1", "Whitney2", "Whitney3"):
        table = {"Whitney0": None, "Whitney1": mesh.edges, "Whitney2": mesh.faces, "Whitney3": mesh.tets}[k]
        simp = (s,) if table is None else table[s]
        return simp, Fraction(1), "Whitney form moment"
    if k in ("RegEdge", "RegDualEdge"):
        t = fr.edge_t[s]
        return mesh.edges[s], sa.outer(t, t), "t_e . sigma . t_e"
    if k == "NedEdge":
        return mesh.edges[s], fr.edge_t[s], "u . t_e at the midpoint"
    if k == "NedCEdge":
        return mesh.edges[s], fr.edge_t[s], ("mean of u . t_e" if i == 0 else "increment of u . t_e")
    if k == "CellSkw":
        return mesh.tets[s], sa.mskw(axis), "cellwise skew moment"
    if k == "Vh2FaceNT":
        return mesh.faces[s], sa.outer(fr.face_n[s], fr.face_t[s][i]), "n_f (x) t_i"
    if k == "Vh2FaceTT":
        n = fr.face_n[s]
        return mesh.faces[s], sa.msub(sa.iota(sa.dot(n, n)), sa.outer(n, n)), "tangential projector |n|^2 I - n n^T"
    if k == "Vh3EdgeN":
        return mesh.edges[s], fr.edge_n[s][i], "edge normal delta"
    if k == "Wh0Cell":
        return mesh.tets[s], axis, "cellwise constant component"
    if k == "Wh1Face":
        return mesh.faces[s], sa.outer(axis, fr.face_n[s]), "c (x) n_f"
    if k == "Wh2Edge":
        return mesh.edges[s], sa.outer(axis, fr.edge_t[s]), "c (x) t_e"
    if k in ("Xcell", "Phi1Face", "Phi2Edge", "Phi3Vertex"):
        simp = {"Xcell": mesh.tets, "Phi1Face": mesh.faces, "Phi2Edge": mesh.edges}.get(k)
        simp = (s,) if simp is None else simp[s]
        return simp, sa.rm_basis()[i], "rigid motion argument"
    if k == "PhiNormal":
        return mesh.faces[s], sa.RigidMotion.from_coords(phi_basis(mesh, s)[i]), "rigid motion with normal trace"
    if k == "XHat2":
        basis, _, _ = xhat2_basis(mesh, s)
        return mesh.edges[s], sa.RigidMotion.from_coords(basis[i]), "rigid motion with p . t_e = 0 on e"
    if k in ("RMFace",):
        e = face_edges(mesh, s)[i]
        return mesh.faces[s], fr.edge_t[e], "tangential trace moment on a face edge"
    if k == "RMEdge":
        return mesh.edges[s], fr.edge_t[s], "tangential trace"
    if k == "P1nFace":
        return mesh.faces[s], fr.face_n[s], f"lambda_{i} n_f"
    if k == "P1nEdge":
        return mesh.edges[s], fr.edge_n[s][i % 2], f"lambda_{i // 2} n_{i % 2 + 1}"
    if k in ("P0nFace", "HessV1"):
        n = fr.face_n[s]
        return mesh.faces[s], sa.outer(n, n) if k == "HessV1" else n, "normal payload"
    if k in ("P0nEdge", "HessV2"):
        n = fr.edge_n[s][i]
        return mesh.edges[s], sa.outer(n, fr.edge_t[s]) if k == "HessV2" else n, "edge normal payload"
    raise UnknownSpace(k)

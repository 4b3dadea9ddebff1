"""Oriented tetrahedral simplicial complexes with exact rational geometry.

Simplices are stored as strictly increasing vertex tuples; that sorted order
is the canonical orientation used by :func:`incidence`.  Geometry (signed
volumes, outward normals, conormals) is always evaluated in exact
:class:`~fractions.Fraction` arithmetic.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from . import smallalg as sa

Point3 = tuple[Fraction, Fraction, Fraction]


class MeshError(ValueError):
    pass


class DegenerateTet(MeshError):
    pass


class NonManifoldFace(MeshError):
    pass


class DuplicateTet(MeshError):
    pass


class DimMismatch(MeshError):
    pass


class UnknownSimplex(MeshError):
    pass


class InvalidParams(MeshError):
    pass


@dataclass(frozen=True)
class Simplex:
    dim: int
    vertices: tuple[int, ...]
    interior: bool = True

    def __post_init__(self):
        if len(self.vertices) != self.dim + 1:
            raise DimMismatch(f"{self.vertices} is not a {self.dim}-simplex")
        if any(a >= b for a, b in zip(self.vertices, self.vertices[1:])):
            raise MeshError(f"vertex tuple {self.vertices} must be strictly increasing")


def incidence(tau: Sequence[int] | Simplex, sigma: Sequence[int] | Simplex) -> int:
    """Incidence number with the sign ``(-1)**(j+1)`` for deletion of vertex ``j``.

    Both arguments are taken in sorted (canonical) vertex order.
    """
    t = tuple(tau.vertices if isinstance(tau, Simplex) else tau)
    s = tuple(sigma.vertices if isinstance(sigma, Simplex) else sigma)
    if len(t) != len(s) - 1:
        raise DimMismatch(f"dim {len(t) - 1} is not dim {len(s) - 1} minus one")
    for j in range(len(s)):
        if s[:j] + s[j + 1:] == t:
            return -1 if j % 2 == 0 else 1
    return 0


def _as_point(p) -> Point3:
    if len(p) != 3:
        raise InvalidParams(f"point {p!r} is not 3D")
    return tuple(Fraction(c) for c in p)  # type: ignore[return-value]


@dataclass(frozen=True)
class FrameSet:
    """Scaled (non-normalized) rational frames.

    ``edge_t[e]``, ``edge_n[e] = (n1, n2)``; ``face_n[f]``, ``face_t[f] = (t1, t2)``.
    """

    edge_t: tuple
    edge_n: tuple
    face_n: tuple
    face_t: tuple


class SimplicialComplex3:
    """A 3D simplicial complex built from a tetrahedral cell list.

    ``tets``, ``faces``, ``edges`` hold sorted vertex tuples with stable,
    deterministic indices.  Interior flags follow the relative-homology
    convention: a simplex is on the boundary iff it lies in a face that
    belongs to exactly one tetrahedron.
    """

    def __init__(self, vertices: Sequence[Sequence], tets: Sequence[Sequence[int]]):
        if not tets:
            raise InvalidParams("at least one tetrahedron is required")
        self.vertices: tuple[Point3, ...] = tuple(_as_point(p) for p in vertices)
        nv = len(self.vertices)
        canon = []
        seen = set()
        for t in tets:
            if len(t) != 4 or len(set(t)) != 4:
                raise InvalidParams(f"tet {t!r} needs 4 distinct vertices")
            if any(not (0 <= v < nv) for v in t):
                raise InvalidParams(f"tet {t!r} references a missing vertex")
            s = tuple(sorted(int(v) for v in t))
            if s in seen:
                raise DuplicateTet(f"tet {s} listed twice")
            seen.add(s)
            canon.append(s)
        self.tets: tuple[tuple[int, ...], ...] = tuple(canon)
        signs = []
        oriented = []
        for t in self.tets:
            vol = self._det(t)
            if vol == 0:
                raise DegenerateTet(f"tet {t} has zero volume")
            sign = 1 if vol > 0 else -1
            signs.append(sign)
            oriented.append(t if sign > 0 else (t[1], t[0], t[2], t[3]))
        # orientation of the sorted vertex order; oriented_tets is always positive
        self.tet_sign: tuple[int, ...] = tuple(signs)
        self.oriented_tets: tuple[tuple[int, ...], ...] = tuple(oriented)

        face_idx: dict[tuple[int, ...], int] = {}
        edge_idx: dict[tuple[int, ...], int] = {}
        faces: list[tuple[int, ...]] = []
        edges: list[tuple[int, ...]] = []
        face_tets: list[list[int]] = []
        for k, t in enumerate(self.tets):
            for f in itertools.combinations(t, 3):
                if f not in face_idx:
                    face_idx[f] = len(faces)
                    faces.append(f)
                    face_tets.append([])
                face_tets[face_idx[f]].append(k)
                for e in itertools.combinations(f, 2):
                    if e not in edge_idx:
                        edge_idx[e] = len(edges)
                        edges.append(e)
        for f, ts in zip(faces, face_tets):
            if len(ts) > 2:
                raise NonManifoldFace(f"face {f} is shared by {len(ts)} tets")
        self.faces = tuple(faces)
        self.edges = tuple(edges)
        self.face_index = face_idx
        self.edge_index = edge_idx
        self.face_tets = tuple(tuple(ts) for ts in face_tets)

        used = sorted({v for t in self.tets for v in t})
        self.used_vertices = tuple(used)
        bverts: set[int] = set()
        bedges: set[tuple[int, ...]] = set()
        bfaces = set()
        for f, ts in zip(faces, face_tets):
            if len(ts) == 1:
                bfaces.add(f)
                bverts.update(f)
                bedges.update(itertools.combinations(f, 2))
        self.face_interior = tuple(f not in bfaces for f in faces)
        self.edge_interior = tuple(e not in bedges for e in edges)
        self.vertex_interior = tuple(v not in bverts and v in set(used) for v in range(nv))

        self.edge_faces: tuple[tuple[int, ...], ...]
        ef: list[list[int]] = [[] for _ in edges]
        for fi, f in enumerate(faces):
            for e in itertools.combinations(f, 2):
                ef[edge_idx[e]].append(fi)
        self.edge_faces = tuple(tuple(x) for x in ef)
        ve: list[list[int]] = [[] for _ in range(nv)]
        for ei, e in enumerate(edges):
            for v in e:
                ve[v].append(ei)
        self.vertex_edges = tuple(tuple(x) for x in ve)

        self.interior_faces = tuple(i for i, b in enumerate(self.face_interior) if b)
        self.interior_edges = tuple(i for i, b in enumerate(self.edge_interior) if b)
        self.interior_vertices = tuple(v for v in used if self.vertex_interior[v])

    # geometry --------------------------------------------------------
    def _det(self, t: Sequence[int]) -> Fraction:
        p = [self.vertices[v] for v in t]
        return sa.det3(sa.sub(p[1], p[0]), sa.sub(p[2], p[0]), sa.sub(p[3], p[0]))

    def point(self, v: int) -> Point3:
        return self.vertices[v]

    def midpoint(self, simplex: Sequence[int]) -> Point3:
        n = len(simplex)
        pts = [self.vertices[v] for v in simplex]
        return tuple(sum((p[i] for p in pts), Fraction(0)) / n for i in range(3))  # type: ignore[return-value]

    def face_normal(self, f: int):
        a, b, c = (self.vertices[v] for v in self.faces[f])
        return sa.cross(sa.sub(b, a), sa.sub(c, a))

    def edge_tangent(self, e: int):
        a, b = (self.vertices[v] for v in self.edges[e])
        return sa.sub(b, a)

    def outward_sign(self, f: int, k: int) -> int:
        """+1 when the face normal ``n_f`` points out of tet ``k``."""
        face = self.faces[f]
        opp = next(v for v in self.tets[k] if v not in face)
        d = sa.dot(self.face_normal(f), sa.sub(self.vertices[face[0]], self.vertices[opp]))
        return 1 if d > 0 else -1

    def conormal_sign(self, e: int, f: int) -> int:
        """+1 when ``t_e x n_f`` points out of face ``f`` across edge ``e``."""
        edge = self.edges[e]
        opp = next(v for v in self.faces[f] if v not in edge)
        w = sa.cross(self.edge_tangent(e), self.face_normal(f))
        d = sa.dot(w, sa.sub(self.vertices[edge[0]], self.vertices[opp]))
        return 1 if d > 0 else -1

    # counts ----------------------------------------------------------
    @property
    def counts(self) -> dict[str, int]:
        return {
            "V": len(self.used_vertices),
            "E": len(self.edges),
            "F": len(self.faces),
            "K": len(self.tets),
            "V0": len(self.interior_vertices),
            "E0": len(self.interior_edges),
            "F0": len(self.interior_faces),
        }

    def euler_characteristic(self) -> int:
        c = self.counts
        return c["V"] - c["E"] + c["F"] - c["K"]

    def simplices(self, dim: int, interior_only: bool = False) -> list[tuple[int, ...]]:
        if dim == 0:
            vs = self.interior_vertices if interior_only else self.used_vertices
            return [(v,) for v in vs]
        table = {1: self.edges, 2: self.faces, 3: self.tets}[dim]
        if interior_only and dim in (1, 2):
            flags = self.edge_interior if dim == 1 else self.face_interior
            return [s for s, b in zip(table, flags) if b]
        return list(table)

    def is_interior(self, simplex: Sequence[int]) -> bool:
        s = tuple(sorted(simplex))
        if len(s) == 4:
            return True
        if len(s) == 3:
            return self.face_interior[self.face_index[s]]
        if len(s) == 2:
            return self.edge_interior[self.edge_index[s]]
        return self.vertex_interior[s[0]]

    def star(self, sigma: Sequence[int] | Simplex) -> list[int]:
        """Indices of all tets containing ``sigma``."""
        s = set(sigma.vertices if isinstance(sigma, Simplex) else sigma)
        if not self._contains(tuple(sorted(s))):
            raise UnknownSimplex(f"{sorted(s)} is not a simplex of this mesh")
        return [k for k, t in enumerate(self.tets) if s.issubset(t)]

    def _contains(self, s: tuple[int, ...]) -> bool:
        if len(s) == 1:
            return s[0] in set(self.used_vertices)
        if len(s) == 2:
            return s in self.edge_index
        if len(s) == 3:
            return s in self.face_index
        return s in set(self.tets)

    def components(self) -> int:
        """Number of connected components (tets joined through shared vertices)."""
        parent = {v: v for v in self.used_vertices}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b in self.edges:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
        return len({find(v) for v in self.used_vertices})

    def frames(self) -> FrameSet:
        return frames(self)


def build_complex(vertices: Sequence[Sequence], tets: Sequence[Sequence[int]]) -> SimplicialComplex3:
    return SimplicialComplex3(vertices, tets)


_AXES = ((1, 0, 0), (0, 1, 0), (0, 0, 1))


def _edge_normals(t):
    """Gram-Schmidt of the first two coordinate axes that stay independent of ``t``."""
    tt = sa.dot(t, t)
    basis = [t]
    out = []
    for ax in _AXES:
        v = tuple(Fraction(c) for c in ax)
        for b in basis:
            v = sa.sub(v, sa.smul(sa.dot(v, b) / sa.dot(b, b), b))
        if any(v):
            out.append(v)
            basis.append(v)
        if len(out) == 2:
            break
    assert tt != 0 and len(out) == 2
    return tuple(out)


def frames(mesh: SimplicialComplex3) -> FrameSet:
    edge_t = tuple(mesh.edge_tangent(e) for e in range(len(mesh.edges)))
    edge_n = tuple(_edge_normals(t) for t in edge_t)
    face_n = []
    face_t = []
    for f, verts in enumerate(mesh.faces):
        a, b, _ = (mesh.vertices[v] for v in verts)
        n = mesh.face_normal(f)
        t1 = sa.sub(b, a)
        face_n.append(n)
        face_t.append((t1, sa.cross(n, t1)))
    return FrameSet(edge_t, edge_n, tuple(face_n), tuple(face_t))


# ----------------------------------------------------------------------
# generators


def _grid(nx: int, ny: int, nz: int, skip=lambda i, j, k: False):
    if min(nx, ny, nz) < 1:
        raise InvalidParams(f"grid dimensions must be positive, got {(nx, ny, nz)}")

    def vid(i, j, k):
        return i + (nx + 1) * (j + (ny + 1) * k)

    verts = [(i, j, k) for k in range(nz + 1) for j in range(ny + 1) for i in range(nx + 1)]
    tets = []
    for k in range(nz):
        for j in range(ny):
            for i in range(nx):
                if skip(i, j, k):
                    continue
                # Kuhn subdivision: one tet per axis ordering along the main diagonal
                for perm in itertools.permutations(range(3)):
                    p = [i, j, k]
                    path = [vid(*p)]
                    for ax in perm:
                        p[ax] += 1
                        path.append(vid(*p))
                    tets.append(path)
    return _compact(verts, tets)


def _compact(verts, tets):
    used = sorted({v for t in tets for v in t})
    remap = {v: n for n, v in enumerate(used)}
    return [verts[v] for v in used], [[remap[v] for v in t] for t in tets]


def generate_mesh(kind: str, params: Sequence[int] | None = None) -> SimplicialComplex3:
    """Test geometries: ``tet``, ``two_tet``, ``box`` (nx, ny, nz), ``tunnel``, ``cavity``."""
    if kind == "tet":
        return SimplicialComplex3([(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)], [(0, 1, 2, 3)])
    if kind == "two_tet":
        return SimplicialComplex3(
            [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 1)], [(0, 1, 2, 3), (1, 2, 3, 4)]
        )
    if kind == "box":
        if params is None or len(params) != 3:
            raise InvalidParams("box needs three grid sizes")
        return SimplicialComplex3(*_grid(*(int(p) for p in params)))
    if kind == "tunnel":
        return SimplicialComplex3(*_grid(3, 3, 1, skip=lambda i, j, k: (i, j) == (1, 1)))
    if kind == "cavity":
        return SimplicialComplex3(*_grid(3, 3, 3, skip=lambda i, j, k: (i, j, k) == (1, 1, 1)))
    raise InvalidParams(f"unknown mesh kind {kind!r}")


# ----------------------------------------------------------------------
# text format v1


def _fmt(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def dumps_mesh(mesh: SimplicialComplex3) -> str:
    lines = [f"vertices {len(mesh.vertices)}"]
    lines += [" ".join(_fmt(c) for c in p) for p in mesh.vertices]
    lines.append(f"tets {len(mesh.tets)}")
    lines += [" ".join(str(v) for v in t) for t in mesh.oriented_tets]
    return "\n".join(lines) + "\n"


def loads_mesh(text: str) -> SimplicialComplex3:
    rows = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append(line.split())
    try:
        it = iter(rows)
        head = next(it)
        if head[0] != "vertices":
            raise MeshError("expected 'vertices N'")
        verts = [tuple(Fraction(x) for x in next(it)) for _ in range(int(head[1]))]
        head = next(it)
        if head[0] != "tets":
            raise MeshError("expected 'tets M'")
        tets = [tuple(int(x) for x in next(it)) for _ in range(int(head[1]))]
    except StopIteration:
        raise MeshError("truncated mesh file") from None
    except (ValueError, ZeroDivisionError) as exc:
        raise MeshError(f"malformed mesh file: {exc}") from None
    return SimplicialComplex3(verts, tets)


def read_mesh(path: str | Path) -> SimplicialComplex3:
    return loads_mesh(Path(path).read_text())


def write_mesh(mesh: SimplicialComplex3, path: str | Path) -> None:
    Path(path).write_text(dumps_mesh(mesh))

"""Cochain complexes, exact cohomology dimensions and the simplicial oracle."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .mesh import SimplicialComplex3, incidence
from .sparse import SparseMat, rank_exact


class ComplexPropertyViolated(AssertionError):
    pass


@dataclass
class CochainComplex:
    """Spaces ``D^0..D^k`` (given by their dimensions and labels) and maps ``A^i: D^i -> D^{i+1}``."""

    label: str
    dims: list[int]
    maps: list[SparseMat]
    space_ids: list[str] = field(default_factory=list)
    check: bool = True

    def __post_init__(self):
        if len(self.maps) != len(self.dims) - 1:
            raise ValueError("need exactly one map between consecutive spaces")
        for i, A in enumerate(self.maps):
            if A.shape != (self.dims[i + 1], self.dims[i]):
                raise ValueError(f"{self.label}: map {i} has shape {A.shape}, expected {(self.dims[i + 1], self.dims[i])}")
        if self.check:
            self.assert_complex()

    def products(self) -> list[SparseMat]:
        return [self.maps[i + 1] @ self.maps[i] for i in range(len(self.maps) - 1)]

    def assert_complex(self) -> None:
        for i, P in enumerate(self.products()):
            if not P.is_zero():
                raise ComplexPropertyViolated(f"{self.label}: A^{i + 1} A^{i} has {P.nnz} nonzero entries")


@dataclass
class CohomologyReport:
    label: str
    dims: list[int]
    ranks: list[int]
    kernels: list[int]
    cohomology: list[int]
    expected: list[int] | None = None

    @property
    def passed(self) -> bool | None:
        if self.expected is None:
            return None
        return list(self.cohomology) == list(self.expected)

    def euler_consistent(self) -> bool:
        alt_spaces = sum((-1) ** i * d for i, d in enumerate(self.dims))
        alt_h = sum((-1) ** i * h for i, h in enumerate(self.cohomology))
        return alt_spaces == alt_h

    def as_dict(self) -> dict:
        return {
            "complex": self.label,
            "space_dims": self.dims,
            "ranks": self.ranks,
            "dims": self.cohomology,
            "expected": self.expected,
            "pass": self.passed,
        }


def cohomology_dims(C: CochainComplex, expected: Sequence[int] | None = None, ranks: Sequence[int] | None = None) -> CohomologyReport:
    C.assert_complex()
    if ranks is None:
        ranks = [rank_exact(A) for A in C.maps]
    ranks = list(ranks)
    kernels = [d - (ranks[i] if i < len(ranks) else 0) for i, d in enumerate(C.dims)]
    coh = [kernels[i] - (ranks[i - 1] if i > 0 else 0) for i in range(len(C.dims))]
    return CohomologyReport(C.label, list(C.dims), ranks, kernels, coh, list(expected) if expected is not None else None)


# ----------------------------------------------------------------------
# relative simplicial homology


def interior_simplices(mesh: SimplicialComplex3) -> list[list[tuple[int, ...]]]:
    """Interior k-simplices for k = 0..3 (chains of the pair (mesh, boundary))."""
    return [mesh.simplices(k, interior_only=True) for k in range(4)]


def relative_boundary_matrices(mesh: SimplicialComplex3) -> dict[int, SparseMat]:
    """``{k: d_k}`` for k = 1..3 on interior simplices; entries are incidence numbers."""
    simp = interior_simplices(mesh)
    out = {}
    for k in (1, 2, 3):
        lower = {s: i for i, s in enumerate(simp[k - 1])}
        trip = []
        for j, s in enumerate(simp[k]):
            for drop in range(k + 1):
                t = s[:drop] + s[drop + 1:]
                i = lower.get(t)
                if i is not None:
                    trip.append((i, j, incidence(t, s)))
        out[k] = SparseMat.from_triplets(len(simp[k - 1]), len(simp[k]), trip)
    return out


def absolute_coboundary_matrices(mesh: SimplicialComplex3) -> list[SparseMat]:
    """Coboundaries ``d^k = d_{k+1}^T`` over all simplices (k = 0..2)."""
    simp = [mesh.simplices(k) for k in range(4)]
    out = []
    for k in (1, 2, 3):
        lower = {s: i for i, s in enumerate(simp[k - 1])}
        trip = []
        for j, s in enumerate(simp[k]):
            for drop in range(k + 1):
                t = s[:drop] + s[drop + 1:]
                trip.append((j, lower[t], incidence(t, s)))
        out.append(SparseMat.from_triplets(len(simp[k]), len(simp[k - 1]), trip))
    return out


def relative_homology_dims(mesh: SimplicialComplex3, coeff_dim: int = 1) -> list[int]:
    """``dim H_k(mesh, V; boundary)`` for k = 0..3 with ``dim V = coeff_dim``."""
    d = relative_boundary_matrices(mesh)
    sizes = [len(s) * coeff_dim for s in interior_simplices(mesh)]
    r = {k: rank_exact(m.kron_identity(coeff_dim) if coeff_dim > 1 else m) for k, m in d.items()}
    r[0] = 0
    r[4] = 0
    return [sizes[k] - r[k] - r[k + 1] for k in range(4)]


def de_rham_betti(mesh: SimplicialComplex3) -> tuple[int, int, int, int]:
    """de Rham Betti numbers ``b^k = dim H_{3-k}(mesh; boundary)``."""
    h = relative_homology_dims(mesh)
    return tuple(h[3 - k] for k in range(4))  # type: ignore[return-value]


def coefficient_tensor_check(mesh: SimplicialComplex3, V_dim: int) -> bool:
    """Relative homology with ``V_dim`` coefficients equals ``V_dim`` times the scalar one."""
    if V_dim < 1:
        raise ValueError("V_dim must be >= 1")
    scalar = relative_homology_dims(mesh)
    lifted = relative_homology_dims(mesh, V_dim)
    return lifted == [V_dim * h for h in scalar]

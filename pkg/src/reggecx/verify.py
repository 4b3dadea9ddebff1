"""Executable checks of every structural claim, with a JSON/text verdict report.

Expected cohomology dimensions come only from the simplicial oracle
(:func:`reggecx.homology.de_rham_betti`) and the closed-form table in
:func:`expected_cohomology`, never from the complex under test.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from . import smallalg as sa
from .assembly import COMPLEX_IDS, Assembler, ChainMap, DecompositionResidual, UnknownComplex
from .homology import CochainComplex, CohomologyReport, coefficient_tensor_check, cohomology_dims, de_rham_betti
from .mesh import SimplicialComplex3
from .sparse import SparseMat, nullspace, rank_exact, vstack


def expected_cohomology(complex_id: str, mesh: SimplicialComplex3, betti: tuple | None = None) -> list[int] | None:
    """Expected cohomology dimensions; ``None`` for complexes without a stated value (``vh_row``)."""
    b = betti if betti is not None else de_rham_betti(mesh)
    c = mesh.counts
    scale = {"regge": 6, "twisted": 6, "x_rm": 6, "ned": 6, "nedc": 6, "rm_simplicial": 6,
             "wh_row": 3, "p0n": 4, "hessian": 4, "whitney": 1}
    if complex_id in scale:
        return [scale[complex_id] * x for x in b]
    if complex_id == "rm_aux":
        return [c["E"], 0, 0, 0]
    if complex_id == "p1n":
        return [3 * c["V"], 0, 0, 0]
    if complex_id == "vh_row":
        return None
    raise UnknownComplex(complex_id)


@dataclass
class CheckResult:
    name: str
    anchor: str
    expected: object
    computed: object
    passed: bool
    informational: bool = False
    runtime: float = 0.0

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "anchor": self.anchor,
            "expected": _jsonable(self.expected),
            "computed": _jsonable(self.computed),
            "pass": self.passed,
            "informational": self.informational,
        }


@dataclass
class VerdictReport:
    mesh_counts: dict
    seed: int
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if not c.informational)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed and not c.informational]

    def to_json(self) -> str:
        doc = {
            "mesh": self.mesh_counts,
            "seed": self.seed,
            "pass": self.passed,
            "checks": [c.as_dict() for c in self.checks],
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    def to_text(self) -> str:
        lines = []
        for c in self.checks:
            tag = "INFO" if c.informational else ("PASS" if c.passed else "FAIL")
            lines.append(f"[{tag}] {c.name}: computed={_short(c.computed)} expected={_short(c.expected)} ({c.runtime:.2f}s)")
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'} ({len(self.failures())} hard failures)")
        return "\n".join(lines)


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _short(x) -> str:
    s = json.dumps(_jsonable(x))
    return s if len(s) < 100 else s[:97] + "..."


# ----------------------------------------------------------------------


class _Context:
    """Shared, lazily built data for one verification run."""

    def __init__(self, mesh: SimplicialComplex3, seed: int):
        self.mesh = mesh
        self.seed = seed
        self.asm = Assembler(mesh)
        self.betti = de_rham_betti(mesh)
        self._complexes: dict[str, CochainComplex] = {}
        self._reports: dict[str, CohomologyReport] = {}
        self._errors: dict[str, str] = {}

    def complex(self, cid: str) -> CochainComplex | None:
        if cid not in self._complexes and cid not in self._errors:
            try:
                self._complexes[cid] = self.asm.complex(cid)
            except (DecompositionResidual, AssertionError) as exc:
                self._errors[cid] = f"{type(exc).__name__}: {exc}"
        return self._complexes.get(cid)

    def error(self, cid: str) -> str | None:
        return self._errors.get(cid)

    def report(self, cid: str) -> CohomologyReport | None:
        if cid not in self._reports:
            C = self.complex(cid)
            if C is None:
                return None
            self._reports[cid] = cohomology_dims(C, expected_cohomology(cid, self.mesh, self.betti))
        return self._reports[cid]


def _commutes(F: ChainMap, src: CochainComplex, tgt: CochainComplex) -> list[bool]:
    return [(F.maps[i + 1] @ src.maps[i] - tgt.maps[i] @ F.maps[i]).is_zero() for i in range(len(src.maps))]


# checks ---------------------------------------------------------------


def check_pointwise(ctx: _Context) -> list[CheckResult]:
    try:
        counts = sa.verify_pointwise_identities(ctx.seed, 20)
        ok = all(v == 20 for v in counts.values())
    except sa.IdentityViolated as exc:
        counts, ok = str(exc), False
    return [CheckResult("pointwise_identities", "pointwise algebraic and differential identities on random rational data",
                        {"instances_each": 20}, counts, ok)]


def check_oracle(ctx: _Context) -> list[CheckResult]:
    m = ctx.mesh
    out = [CheckResult("betti_numbers", "de Rham Betti numbers from relative simplicial homology", None, list(ctx.betti), True, True)]
    uct = all(coefficient_tensor_check(m, d) for d in (3, 4, 6))
    out.append(CheckResult("universal_coefficients", "homology with R^d coefficients is d copies of scalar homology",
                           True, uct, uct))
    comps = m.components()
    out.append(CheckResult("connected_components", "number of connected components (multi-component input is flagged)",
                           1, comps, comps == 1, informational=True))
    return out


_COHOMOLOGY_ANCHORS = {
    "regge": "Regge complex cohomology equals de Rham cohomology tensor rigid motions",
    "twisted": "twisted complex cohomology equals Regge cohomology",
    "x_rm": "rigid-motion coefficient row has de Rham cohomology tensor rigid motions",
    "ned": "Nedelec auxiliary complex has de Rham cohomology tensor rigid motions",
    "nedc": "full-linear Nedelec auxiliary complex has de Rham cohomology tensor rigid motions",
    "wh_row": "piecewise constant vector row has de Rham cohomology tensor R^3",
    "vh_row": "matrix row cohomology (no stated value, reported only)",
    "p0n": "scalar normal-jump complex has de Rham cohomology tensor P1",
    "hessian": "distributional Hessian complex has de Rham cohomology tensor P1",
    "rm_aux": "rigid-motion trace complex is exact above degree 0 with H^0 of dimension #E",
    "p1n": "P1 normal-trace complex is exact above degree 0 with H^0 of dimension 3#V",
    "whitney": "Whitney forms reproduce de Rham Betti numbers",
}


def check_complex_property(ctx: _Context) -> list[CheckResult]:
    out = []
    for cid in COMPLEX_IDS:
        C = ctx.complex(cid)
        if C is None:
            out.append(CheckResult(f"complex_property.{cid}", "A^{k+1} A^k = 0 exactly", 0, ctx.error(cid), False))
            continue
        nnz = [P.nnz for P in C.products()]
        out.append(CheckResult(f"complex_property.{cid}", "A^{k+1} A^k = 0 exactly", [0] * len(nnz), nnz, not any(nnz)))
    return out


def check_cohomology(ctx: _Context, ids=COMPLEX_IDS) -> list[CheckResult]:
    out = []
    for cid in ids:
        r = ctx.report(cid)
        anchor = _COHOMOLOGY_ANCHORS[cid]
        if r is None:
            out.append(CheckResult(f"cohomology.{cid}", anchor, expected_cohomology(cid, ctx.mesh, ctx.betti), ctx.error(cid), False))
            continue
        info = r.expected is None
        out.append(CheckResult(f"cohomology.{cid}", anchor, r.expected, r.cohomology, bool(r.passed) or info, informational=info))
    return out


def check_diagrams(ctx: _Context) -> list[CheckResult]:
    a = ctx.asm
    pairs = {
        "kappa": ("x_rm", "rm_simplicial", "rigid-motion row is isomorphic to simplicial chains with RM coefficients"),
        "g": ("x_rm", "rm_aux", "trace map from the rigid-motion row to the trace complex commutes"),
        "j": ("nedc", "p1n", "restriction from the full-linear Nedelec complex to P1 normal data commutes"),
        "hess_geom": ("hessian", "p0n", "geometric identification of the Hessian complex commutes"),
    }
    out = []
    maps = a.chain_maps()
    for name, (src, tgt, anchor) in pairs.items():
        S, T = ctx.complex(src), ctx.complex(tgt)
        if S is None or T is None:
            out.append(CheckResult(f"diagram.{name}", anchor, [True] * 3, ctx.error(src) or ctx.error(tgt), False))
            continue
        res = _commutes(maps[name], S, T)
        out.append(CheckResult(f"diagram.{name}", anchor, [True] * len(res), res, all(res)))
    k0 = maps["kappa"].maps[0]
    iso = rank_exact(k0) == k0.nrows == k0.ncols
    out.append(CheckResult("diagram.kappa_isomorphism", "kappa is invertible in every degree", True, iso, iso))
    return out


def check_chain_map_kernels(ctx: _Context) -> list[CheckResult]:
    a, m = ctx.asm, ctx.mesh
    c = m.counts
    g, j = a.g_map(), a.j_map()
    out = []

    def kernel_check(name, anchor, M: SparseMat, emb: SparseMat, expected_dim: int):
        contained = (M @ emb).is_zero()
        emb_rank = rank_exact(emb)
        kdim = M.ncols - rank_exact(M)
        ok = contained and emb_rank == expected_dim and kdim == expected_dim
        out.append(CheckResult(name, anchor, {"kernel_dim": expected_dim, "contains_subspace": True},
                               {"kernel_dim": kdim, "contains_subspace": contained, "subspace_rank": emb_rank}, ok))

    kernel_check("kernel.g1", "kernel of the face trace map is the normal rigid motions", g.maps[1], a.emb_phi, 3 * c["F0"])
    kernel_check("kernel.g2", "kernel of the edge trace map is the reduced edge rigid motions", g.maps[2], a.emb_xhat2, 5 * c["E0"])
    reg_in_regphi = vstack([SparseMat.identity(a.dim("reg")), SparseMat.zeros(a.dim("phi"), a.dim("reg"))])
    kernel_check("kernel.j1", "kernel of j^1 is the Regge space", j.maps[1], reg_in_regphi, c["E"])
    reg0p_in_xhat = a.to_xhat2(a.emb_reg0p, "edge deltas as reduced rigid motions")
    kernel_check("kernel.j2", "kernel of j^2 is the dual of interior Regge functionals", j.maps[2], reg0p_in_xhat, c["E0"])
    lag0p_in_x3 = _lag0p_embedding(a)
    kernel_check("kernel.j3", "kernel of j^3 is the dual of interior vector Lagrange functionals", j.maps[3], lag0p_in_x3, 3 * c["V0"])

    for name, M in (("g1", g.maps[1]), ("g2", g.maps[2]), ("j1", j.maps[1]), ("j2", j.maps[2]), ("j3", j.maps[3])):
        r = rank_exact(M)
        out.append(CheckResult(f"surjective.{name}", "chain map component has full row rank", M.nrows, r, r == M.nrows))
    return out


def _lag0p_embedding(a: Assembler) -> SparseMat:
    """(Lag_0)' -> X^3: ``delta_x[e_i]`` is the rigid motion ``e_i x (y - x)`` at ``x``."""
    from .assembly import _Triplets

    T = _Triplets(a.dim("x3"), a.dim("lag0p"))
    for v in a.mesh.interior_vertices:
        x = a.x(v)
        for i in range(3):
            e = tuple(Fraction(int(k == i)) for k in range(3))
            coords = list(sa.smul(-1, sa.cross(e, x))) + list(e)
            for k in range(6):
                T.add(a.idx("x3", "Phi3Vertex", v, k), a.idx("lag0p", "LagDualVertex", v, i), coords[k])
    return T.build()


def check_inc_correction(ctx: _Context) -> list[CheckResult]:
    a = ctx.asm
    lhs = a.inc_phi_x2 @ a.correction
    rhs = (a.emb_reg0p @ a.regge_inc).scale(-1)
    diff = (lhs - rhs).nnz
    return [CheckResult("inc_correction", "rigid-motion boundary of the lifted correction equals minus inc, as matrices",
                        0, diff, diff == 0)]


def check_regge_structure(ctx: _Context) -> list[CheckResult]:
    a = ctx.asm
    out = []
    a1 = (a.regge_inc @ a.regge_def).nnz
    a2 = (a.regge_div @ a.regge_inc).nnz
    out.append(CheckResult("regge.inc_def", "inc composed with Def vanishes", 0, a1, a1 == 0))
    out.append(CheckResult("regge.div_inc", "div composed with inc vanishes", 0, a2, a2 == 0))
    kd = len(nullspace(a.ned_def)) if a.ned_def.nrows else a.dim("ned")
    want = 6 * ctx.mesh.components()
    out.append(CheckResult("ned_kernel", "kernel of Def on Nedelec fields is the global rigid motions per component", want, kd, kd == want))
    rn, rc = ctx.report("ned"), ctx.report("nedc")
    same = rn is not None and rc is not None and rn.cohomology == rc.cohomology
    out.append(CheckResult("nedc_ned_agreement", "both Nedelec auxiliary complexes have equal cohomology",
                           rn.cohomology if rn else None, rc.cohomology if rc else None, same))
    return out


def check_twisted_structure(ctx: _Context) -> list[CheckResult]:
    a = ctx.asm
    out = []
    items = [
        ("grad", lambda: a.vh_grad, "gradient of vector Lagrange fields lies in Regge plus cell skew"),
        ("curl", lambda: a.vh_curl, "row-wise curl of V^1 lies in the face payload span"),
        ("div", lambda: a.vh_div, "row-wise divergence of V^2 lies in edge normal deltas"),
        ("S_blocks", lambda: a.S_blocks, "-mskw, S and 2 vskw map W into V"),
        ("T_blocks", lambda: a.T_blocks[:2], "-vskw and S^{-1} map V^1, V^2 into W"),
    ]
    for name, build, anchor in items:
        try:
            build()
            ok, info = True, "zero residual"
        except DecompositionResidual as exc:
            ok, info = False, str(exc)
        out.append(CheckResult(f"well_defined.{name}", anchor, "zero residual", info, ok))

    dV = [a.vh_grad, a.vh_curl, a.vh_div]
    S = a.S_blocks
    dW = a.wh_maps
    eps = a.TWIST_SIGNS
    for k in range(2):
        d = (dV[k + 1] @ S[k] - S[k + 1] @ dW[k]).nnz
        out.append(CheckResult(f"twisted.mixed_identity_{k}", "d_V S^k = S^{k+1} d_W (block signs alternate accordingly)",
                               0, d, d == 0))
    out.append(CheckResult("twisted.block_signs", "signs eps_k in [[d_V, eps_k S^k], [0, d_W]]", None, list(eps), True, True))

    T = a.T_blocks
    for k in range(2):
        d = (S[k] @ T[k] @ S[k] - S[k]).nnz
        out.append(CheckResult(f"pseudo_inverse.{k}", "S T S = S as matrices", 0, d, d == 0))
    bad = 0
    for e in a.mesh.interior_edges:
        for n in a.fr.edge_n[e]:
            back = sa.smul(2, sa.vskw(sa.mscale(Fraction(1, 2), sa.mskw(n))))
            bad += back != tuple(n)
    out.append(CheckResult("pseudo_inverse.2_payload", "2 vskw (mskw/2) = id on edge normal payloads", 0, bad, bad == 0))
    d2 = (S[2] @ T[2] @ S[2] - S[2]).nnz
    out.append(CheckResult("pseudo_inverse.2_matrix", "S T S = S at degree 2 with T projected onto tangential edge deltas",
                           0, d2, d2 == 0, informational=True))
    res = a.T3_residuals()
    out.append(CheckResult("t3_membership", "mskw/2 of edge normal deltas lies in span{c (x) t_e}",
                           0, {"edges_with_residual": len({r['edge'] for r in res}), "dofs_with_residual": len(res),
                               "sample": res[0]["residual"] if res else None},
                           not res, informational=True))
    out.append(_cellskw_expansion(a))
    return out


def _cellskw_expansion(a: Assembler) -> CheckResult:
    """Curl of a cellwise skew field on one interior face against the closed-form expansion."""
    m = a.mesh
    anchor = "curl of mskw(c) on a face expands as -(c.n)P + (c.t_i) n (x) t_i"
    if not m.interior_faces:
        return CheckResult("cellskw_curl_expansion", anchor, None, "no interior face", True, True)
    f = m.interior_faces[0]
    k = m.face_tets[f][0]
    n = a.fr.face_n[f]
    t1, t2 = a.fr.face_t[f]
    c = (Fraction(1), Fraction(0), Fraction(0))
    s = a.s(f, k)
    want = [s * sa.dot(c, t1) / sa.dot(t1, t1), s * sa.dot(c, t2) / sa.dot(t2, t2), -s * sa.dot(c, n) / sa.dot(n, n)]
    col = a.idx("vh1", "CellSkw", k, 0)
    rows = [a.idx("vh2", "Vh2FaceNT", f, 0), a.idx("vh2", "Vh2FaceNT", f, 1), a.idx("vh2", "Vh2FaceTT", f, 0)]
    got = [a.vh_curl[r, col] for r in rows]
    return CheckResult("cellskw_curl_expansion", anchor, want, got, got == want)


# ----------------------------------------------------------------------

CHECKS: dict[str, Callable[[_Context], list[CheckResult]]] = {
    "pointwise": check_pointwise,
    "oracle": check_oracle,
    "complex_property": check_complex_property,
    "cohomology": check_cohomology,
    "diagrams": check_diagrams,
    "kernels": check_chain_map_kernels,
    "inc_correction": check_inc_correction,
    "regge_structure": check_regge_structure,
    "twisted_structure": check_twisted_structure,
}


class UnknownCheck(KeyError):
    pass


def verify_cohomology(complex_id: str, mesh: SimplicialComplex3) -> CheckResult:
    return check_cohomology(_Context(mesh, 0), (complex_id,))[0]


def verify_diagrams(mesh: SimplicialComplex3) -> list[CheckResult]:
    return check_diagrams(_Context(mesh, 0)) + check_chain_map_kernels(_Context(mesh, 0))


def verify_twisted_structure(mesh: SimplicialComplex3, seed: int = 0) -> list[CheckResult]:
    return check_twisted_structure(_Context(mesh, seed))


def run_all(mesh: SimplicialComplex3, seed: int = 0, checks: list[str] | None = None) -> VerdictReport:
    """Run the named check groups (all by default) and collect the verdicts.

    A group name may also be the name of an individual check (or its prefix,
    e.g. ``cohomology.regge``); the group is run and its results filtered.
    """
    ctx = _Context(mesh, seed)
    rep = VerdictReport(mesh.counts, seed)
    wanted = checks or list(CHECKS)
    for w in wanted:
        group = w.split(".", 1)[0]
        fn = CHECKS.get(group)
        if fn is None:
            fn = next((CHECKS[g] for g in CHECKS if w.startswith(g)), None)
        if fn is None:
            raise UnknownCheck(w)
        t = time.perf_counter()
        res = fn(ctx)
        dt = time.perf_counter() - t
        if w != group and w not in CHECKS:
            res = [r for r in res if r.name == w or r.name.startswith(w + ".")]
            if not res:
                raise UnknownCheck(w)
        for r in res:
            r.runtime = dt / max(len(res), 1)
        rep.checks.extend(res)
    return rep

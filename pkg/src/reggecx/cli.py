"""Command-line interface.

Exit codes: 0 success, 1 a check failed, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import cartan
from .assembly import COMPLEX_IDS, Assembler, DecompositionResidual, export_matrix_market
from .homology import cohomology_dims, de_rham_betti
from .mesh import MeshError, generate_mesh, read_mesh, write_mesh
from .verify import CHECKS, UnknownCheck, expected_cohomology, run_all

NAMED_MESHES = ("tet", "two_tet", "tunnel", "cavity")


class UsageError(Exception):
    pass


def load_mesh(spec: str):
    """``tet``, ``two_tet``, ``tunnel``, ``cavity``, ``box:NX,NY,NZ`` or a mesh file path."""
    if spec in NAMED_MESHES:
        return generate_mesh(spec)
    if spec.startswith("box:"):
        try:
            n = [int(x) for x in spec[4:].split(",")]
        except ValueError:
            raise UsageError(f"bad box size in {spec!r}") from None
        return generate_mesh("box", n)
    p = Path(spec)
    if not p.exists():
        raise UsageError(f"no such mesh file or generator: {spec!r}")
    return read_mesh(p)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def cmd_mesh_gen(args) -> int:
    m = generate_mesh(args.kind, args.n)
    if args.out:
        write_mesh(m, args.out)
    c = m.counts
    doc = {"counts": c, "betti": list(de_rham_betti(m)), "out": args.out}
    if args.format == "json":
        print(json.dumps(doc, sort_keys=True))
    else:
        print(f"V={c['V']} E={c['E']} F={c['F']} K={c['K']}  interior: V0={c['V0']} E0={c['E0']} F0={c['F0']}")
        if args.out:
            print(f"wrote {args.out}")
    return 0


def cmd_cohomology(args) -> int:
    m = load_mesh(args.mesh)
    C = Assembler(m).complex(args.complex)
    r = cohomology_dims(C, expected_cohomology(args.complex, m))
    doc = {"complex": args.complex, "dims": r.cohomology, "expected": r.expected, "pass": r.passed,
           "ranks": r.ranks, "space_dims": r.dims}
    if args.format == "json":
        _emit(json.dumps(doc, sort_keys=True), args.out)
    else:
        _emit(f"{args.complex}: dims={r.cohomology} expected={r.expected} pass={r.passed}", args.out)
    return 0 if r.passed in (True, None) else 1


def cmd_verify(args) -> int:
    m = load_mesh(args.mesh)
    checks = None if args.all or not args.check else args.check
    rep = run_all(m, args.seed, checks)
    _emit(rep.to_json() if args.format == "json" else rep.to_text(), args.out)
    return 0 if rep.passed else 1


def cmd_cartan(args) -> int:
    m = load_mesh(args.mesh)
    asm = Assembler(m)
    if args.solve:
        if not (args.torsion and args.curvature):
            raise UsageError("--solve needs --torsion and --curvature")
        T = _field(args.torsion, "vh2")
        R = _field(args.curvature, "wh2")
        res = cartan.potential_solve(asm, T, R)
        if isinstance(res, cartan.NoSolution):
            doc = {"solution": None, "reason": res.reason, "witness": [cartan._fmt(c) for c in res.witness]}
            _emit(json.dumps(doc, indent=1, sort_keys=True), args.out)
            return 1
        theta, gamma = res
        ok = cartan.torsion_curvature(asm, theta, gamma) == (T, R)
        doc = {"theta": _fdoc("vh1", theta), "gamma": _fdoc("wh1", gamma), "roundtrip": ok}
        _emit(json.dumps(doc, indent=1, sort_keys=True), args.out)
        return 0 if ok else 1
    if not (args.theta and args.gamma):
        raise UsageError("need --theta and --gamma (or --solve)")
    T, R = cartan.torsion_curvature(asm, _field(args.theta, "vh1"), _field(args.gamma, "wh1"))
    doc = {"torsion": _fdoc("vh2", T), "curvature": _fdoc("wh2", R)}
    _emit(json.dumps(doc, indent=1, sort_keys=True), args.out)
    return 0


def _fdoc(space, coeffs) -> dict:
    return {"space": space, "coefficients": [cartan._fmt(c) for c in coeffs]}


def _field(path: str, space: str):
    f = cartan.read_field(path)
    if f.space != space:
        raise UsageError(f"{path}: field lives in {f.space!r}, expected {space!r}")
    return f.coefficients


def cmd_export_matrix(args) -> int:
    m = load_mesh(args.mesh)
    C = Assembler(m).complex(args.complex)
    if not 0 <= args.degree < len(C.maps):
        raise UsageError(f"degree must be in 0..{len(C.maps) - 1}")
    A = C.maps[args.degree]
    src, tgt = C.space_ids[args.degree], C.space_ids[args.degree + 1]
    _emit(export_matrix_market(A, f"{args.complex} degree {args.degree}: {src} -> {tgt}"), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="reggecx", description="Exact assembly and verification of distributional finite element complexes.")
    sub = p.add_subparsers(dest="command", required=True)

    mesh = sub.add_parser("mesh", help="mesh utilities")
    msub = mesh.add_subparsers(dest="mesh_command", required=True)
    gen = msub.add_parser("gen", help="generate a test mesh")
    gen.add_argument("--kind", required=True, choices=["tet", "two_tet", "box", "tunnel", "cavity"])
    gen.add_argument("--n", type=int, nargs=3, metavar=("NX", "NY", "NZ"), help="grid size for box")
    gen.add_argument("--out", help="write the mesh here")
    gen.add_argument("--format", choices=["json", "text"], default="text")
    gen.set_defaults(func=cmd_mesh_gen)

    def common(sp, mesh_required=True):
        sp.add_argument("--mesh", required=mesh_required, default="tet", help="tet | two_tet | tunnel | cavity | box:NX,NY,NZ | path")
        sp.add_argument("--format", choices=["json", "text"], default="json")
        sp.add_argument("--out")

    co = sub.add_parser("cohomology", help="cohomology dimensions of one complex")
    co.add_argument("--complex", required=True, choices=COMPLEX_IDS)
    common(co)
    co.set_defaults(func=cmd_cohomology)

    ve = sub.add_parser("verify", help="run the verification suite")
    ve.add_argument("--all", action="store_true", help="run every check (default when no --check)")
    ve.add_argument("--check", action="append", metavar="NAME", help=f"check group or name; groups: {', '.join(CHECKS)}")
    ve.add_argument("--seed", type=int, default=0)
    common(ve, mesh_required=False)
    ve.set_defaults(func=cmd_verify)

    ca = sub.add_parser("cartan", help="linearized torsion/curvature")
    ca.add_argument("--theta", help="coframe field (space vh1)")
    ca.add_argument("--gamma", help="connection field (space wh1)")
    ca.add_argument("--solve", action="store_true", help="reconstruct (theta, gamma) from torsion and curvature")
    ca.add_argument("--torsion", help="torsion field (space vh2)")
    ca.add_argument("--curvature", help="curvature field (space wh2)")
    common(ca)
    ca.set_defaults(func=cmd_cartan)

    ex = sub.add_parser("export-matrix", help="write one differential as rational MatrixMarket text")
    ex.add_argument("--complex", required=True, choices=COMPLEX_IDS)
    ex.add_argument("--degree", type=int, required=True)
    common(ex)
    ex.set_defaults(func=cmd_export_matrix)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, UnknownCheck, MeshError, cartan.DimensionMismatch, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DecompositionResidual as exc:
        print(f"assembly error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

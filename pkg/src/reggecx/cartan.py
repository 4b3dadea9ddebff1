"""Linearized torsion and curvature on the twisted complex.

A coframe perturbation ``theta`` lives in ``V^1`` (Regge edge moments plus
cellwise skew part), a connection perturbation ``gamma`` in ``W^1`` (face
deltas ``c (x) n_f``).  Torsion and curvature are the two block rows of the
twisted operator ``A^1 = [[curl, -S], [0, curl]]``::

    T = curl theta - S gamma,   R = curl gamma.

Fields are exchanged as JSON: ``{"space": id, "coefficients": ["p/q", ...]}``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .assembly import Assembler
from .sparse import SparseMat, nullspace, solve


class DimensionMismatch(ValueError):
    pass


@dataclass
class Field:
    space: str
    coefficients: list[Fraction]

    def to_json(self) -> str:
        return json.dumps({"space": self.space, "coefficients": [_fmt(c) for c in self.coefficients]}, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "Field":
        doc = json.loads(text)
        try:
            return cls(str(doc["space"]), [Fraction(c) for c in doc["coefficients"]])
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"malformed field file: {exc}") from None


def _fmt(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def read_field(path: str | Path) -> Field:
    return Field.from_json(Path(path).read_text())


def write_field(field: Field, path: str | Path) -> None:
    Path(path).write_text(field.to_json() + "\n")


def _check(asm: Assembler, space: str, values: Sequence) -> list[Fraction]:
    n = asm.dim(space)
    if len(values) != n:
        raise DimensionMismatch(f"space {space!r} expects {n} coefficients, got {len(values)}")
    return [Fraction(v) for v in values]


def _A(asm: Assembler, k: int) -> SparseMat:
    key = f"_twisted_A{k}"
    if not hasattr(asm, key):
        setattr(asm, key, asm.twisted().maps[k])
    return getattr(asm, key)


def torsion_curvature(asm: Assembler, theta: Sequence, gamma: Sequence) -> tuple[list[Fraction], list[Fraction]]:
    """``(T, R) = A^1 (theta, gamma)``; ``T`` in ``V^2``, ``R`` in ``W^2``."""
    x = _check(asm, "vh1", theta) + _check(asm, "wh1", gamma)
    y = _A(asm, 1).apply(x)
    nv = asm.dim("vh2")
    return y[:nv], y[nv:]


def bianchi_residual(asm: Assembler, T: Sequence, R: Sequence) -> list[Fraction]:
    """``A^2 (T, R)``; zero for every torsion/curvature pair."""
    return _A(asm, 2).apply(_check(asm, "vh2", T) + _check(asm, "wh2", R))


def regge_metric_curvature(asm: Assembler, edge_data: Sequence) -> list[Fraction]:
    """Linearized curvature ``inc sigma`` on interior edges of the Regge field with the given edge moments."""
    return asm.regge_inc.apply(_check(asm, "reg", edge_data))


@dataclass
class NoSolution:
    """Why ``A^1 x = (T, R)`` has no solution.

    ``reason`` is ``"not_closed"`` (``witness`` is the nonzero ``A^2 (T, R)``)
    or ``"cohomology"`` (``witness`` is the input itself, a closed vector
    outside the range of ``A^1``; ``functional`` annihilates the range but
    not the witness).
    """

    reason: str
    witness: list[Fraction]
    functional: list[Fraction] | None = None


def potential_solve(asm: Assembler, T: Sequence, R: Sequence, certify: bool = False):
    """Some ``(theta, gamma)`` with ``A^1 (theta, gamma) = (T, R)``, or :class:`NoSolution`.

    With ``certify=True`` an obstruction also carries a functional ``z`` with
    ``z A^1 = 0`` and ``z . (T, R) != 0``.
    """
    y = _check(asm, "vh2", T) + _check(asm, "wh2", R)
    res = _A(asm, 2).apply(y)
    if any(res):
        return NoSolution("not_closed", res)
    x = solve(_A(asm, 1), y)
    if x is None:
        z = None
        if certify:
            for cand in nullspace(_A(asm, 1).T):
                if sum(a * b for a, b in zip(cand, y)):
                    z = cand
                    break
        return NoSolution("cohomology", y, z)
    nv = asm.dim("vh1")
    return x[:nv], x[nv:]


def find_obstruction(asm: Assembler) -> list[Fraction] | None:
    """A vector in ``ker A^2`` outside ``ran A^1``, or ``None`` when the degree-2 cohomology vanishes."""
    A1, A2 = _A(asm, 1), _A(asm, 2)
    left = nullspace(A1.T)
    if not left:
        return None
    Z = SparseMat.from_dense(left, A1.nrows)
    for v in nullspace(A2):
        if any(Z.apply(v)):
            return v
    return None

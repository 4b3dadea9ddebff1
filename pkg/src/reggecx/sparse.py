"""Exact sparse matrices over the rationals and elimination routines.

Entries are :class:`fractions.Fraction`; explicit zeros are never stored.
Rank uses fraction-free integer elimination (rows are cleared of
denominators, combined with integer cross-multiplication and reduced by their
content), with a static Markowitz-style ordering: columns are visited from
sparsest to densest and rows are inserted from shortest to longest.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, Iterator, Mapping, Sequence

Scalar = Fraction | int


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


class SparseMat:
    """Immutable-by-convention sparse rational matrix stored row-wise."""

    __slots__ = ("nrows", "ncols", "rows")

    def __init__(self, nrows: int, ncols: int, rows: Mapping[int, Mapping[int, Scalar]] | None = None):
        self.nrows = nrows
        self.ncols = ncols
        self.rows: dict[int, dict[int, Fraction]] = {}
        if rows:
            for i, row in rows.items():
                clean = {j: _frac(v) for j, v in row.items() if v != 0}
                if clean:
                    self.rows[i] = clean

    # construction -----------------------------------------------------
    @classmethod
    def from_triplets(cls, nrows: int, ncols: int, triplets: Iterable[tuple[int, int, Scalar]]) -> "SparseMat":
        rows: dict[int, dict[int, Fraction]] = {}
        for i, j, v in triplets:
            if not (0 <= i < nrows and 0 <= j < ncols):
                raise IndexError(f"entry ({i},{j}) outside {nrows}x{ncols}")
            if v == 0:
                continue
            r = rows.setdefault(i, {})
            s = r.get(j, Fraction(0)) + _frac(v)
            if s == 0:
                r.pop(j, None)
            else:
                r[j] = s
        return cls(nrows, ncols, rows)

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "SparseMat":
        return cls(nrows, ncols)

    @classmethod
    def identity(cls, n: int, scale: Scalar = 1) -> "SparseMat":
        return cls(n, n, {i: {i: scale} for i in range(n)})

    @classmethod
    def diag(cls, values: Sequence[Scalar]) -> "SparseMat":
        return cls(len(values), len(values), {i: {i: v} for i, v in enumerate(values)})

    @classmethod
    def from_dense(cls, dense: Sequence[Sequence[Scalar]], ncols: int | None = None) -> "SparseMat":
        nrows = len(dense)
        if ncols is None:
            ncols = len(dense[0]) if nrows else 0
        return cls(nrows, ncols, {i: dict(enumerate(r)) for i, r in enumerate(dense)})

    # basic queries ----------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    @property
    def nnz(self) -> int:
        return sum(len(r) for r in self.rows.values())

    def is_zero(self) -> bool:
        return not self.rows

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.rows.get(i, {}).get(j, Fraction(0))

    def items(self) -> Iterator[tuple[int, int, Fraction]]:
        for i in sorted(self.rows):
            row = self.rows[i]
            for j in sorted(row):
                yield i, j, row[j]

    def row(self, i: int) -> dict[int, Fraction]:
        return dict(self.rows.get(i, {}))

    def col(self, j: int) -> dict[int, Fraction]:
        return {i: r[j] for i, r in self.rows.items() if j in r}

    def to_dense(self) -> list[list[Fraction]]:
        out = [[Fraction(0)] * self.ncols for _ in range(self.nrows)]
        for i, j, v in self.items():
            out[i][j] = v
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseMat):
            return NotImplemented
        return self.shape == other.shape and self.rows == other.rows

    def __repr__(self) -> str:
        return f"SparseMat({self.nrows}x{self.ncols}, nnz={self.nnz})"

    # algebra ----------------------------------------------------------
    def transpose(self) -> "SparseMat":
        rows: dict[int, dict[int, Fraction]] = {}
        for i, r in self.rows.items():
            for j, v in r.items():
                rows.setdefault(j, {})[i] = v
        return SparseMat(self.ncols, self.nrows, rows)

    @property
    def T(self) -> "SparseMat":
        return self.transpose()

    def __add__(self, other: "SparseMat") -> "SparseMat":
        self._check_same(other)
        rows = {i: dict(r) for i, r in self.rows.items()}
        for i, r in other.rows.items():
            tgt = rows.setdefault(i, {})
            for j, v in r.items():
                s = tgt.get(j, 0) + v
                if s == 0:
                    tgt.pop(j, None)
                else:
                    tgt[j] = s
        return SparseMat(self.nrows, self.ncols, rows)

    def __neg__(self) -> "SparseMat":
        return self.scale(-1)

    def __sub__(self, other: "SparseMat") -> "SparseMat":
        return self + (-other)

    def scale(self, c: Scalar) -> "SparseMat":
        c = _frac(c)
        if c == 0:
            return SparseMat(self.nrows, self.ncols)
        return SparseMat(self.nrows, self.ncols, {i: {j: v * c for j, v in r.items()} for i, r in self.rows.items()})

    def __matmul__(self, other):
        if isinstance(other, SparseMat):
            if self.ncols != other.nrows:
                raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
            rows: dict[int, dict[int, Fraction]] = {}
            orows = other.rows
            for i, r in self.rows.items():
                acc: dict[int, Fraction] = {}
                for k, v in r.items():
                    ok = orows.get(k)
                    if not ok:
                        continue
                    for j, w in ok.items():
                        acc[j] = acc.get(j, 0) + v * w
                acc = {j: x for j, x in acc.items() if x != 0}
                if acc:
                    rows[i] = acc
            return SparseMat(self.nrows, other.ncols, rows)
        return self.apply(other)

    def apply(self, x: Sequence[Scalar]) -> list[Fraction]:
        """Matrix-vector product with a dense vector."""
        if len(x) != self.ncols:
            raise ValueError(f"vector length {len(x)} != {self.ncols}")
        out = [Fraction(0)] * self.nrows
        for i, r in self.rows.items():
            out[i] = sum((v * x[j] for j, v in r.items()), Fraction(0))
        return out

    def _check_same(self, other: "SparseMat") -> None:
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")

    def submatrix(self, rows: Sequence[int] | None = None, cols: Sequence[int] | None = None) -> "SparseMat":
        rmap = {r: k for k, r in enumerate(rows)} if rows is not None else None
        cmap = {c: k for k, c in enumerate(cols)} if cols is not None else None
        out: dict[int, dict[int, Fraction]] = {}
        for i, r in self.rows.items():
            ii = i if rmap is None else rmap.get(i)
            if ii is None:
                continue
            new = {}
            for j, v in r.items():
                jj = j if cmap is None else cmap.get(j)
                if jj is not None:
                    new[jj] = v
            if new:
                out[ii] = new
        return SparseMat(self.nrows if rows is None else len(rows), self.ncols if cols is None else len(cols), out)

    def kron_identity(self, d: int) -> "SparseMat":
        """``self ⊗ I_d`` with block index ``i*d + a``."""
        rows: dict[int, dict[int, Fraction]] = {}
        for i, r in self.rows.items():
            for a in range(d):
                rows[i * d + a] = {j * d + a: v for j, v in r.items()}
        return SparseMat(self.nrows * d, self.ncols * d, rows)


def hstack(mats: Sequence[SparseMat]) -> SparseMat:
    nrows = mats[0].nrows
    rows: dict[int, dict[int, Fraction]] = {}
    off = 0
    for m in mats:
        if m.nrows != nrows:
            raise ValueError("hstack row mismatch")
        for i, r in m.rows.items():
            tgt = rows.setdefault(i, {})
            for j, v in r.items():
                tgt[j + off] = v
        off += m.ncols
    return SparseMat(nrows, off, rows)


def vstack(mats: Sequence[SparseMat]) -> SparseMat:
    ncols = mats[0].ncols
    rows: dict[int, dict[int, Fraction]] = {}
    off = 0
    for m in mats:
        if m.ncols != ncols:
            raise ValueError("vstack col mismatch")
        for i, r in m.rows.items():
            rows[i + off] = dict(r)
        off += m.nrows
    return SparseMat(off, ncols, rows)


def block(grid: Sequence[Sequence[SparseMat]]) -> SparseMat:
    return vstack([hstack(list(row)) for row in grid])


# ----------------------------------------------------------------------
# elimination


def _integer_row(row: Mapping[int, Fraction]) -> dict[int, int]:
    den = 1
    for v in row.values():
        d = v.denominator
        den = den * d // gcd(den, d)
    ints = {j: int(v * den) for j, v in row.items()}
    return _primitive(ints)


def _primitive(row: dict[int, int]) -> dict[int, int]:
    g = 0
    for v in row.values():
        g = gcd(g, v)
        if g == 1:
            return row
    if g > 1:
        return {j: v // g for j, v in row.items()}
    return row


def rank_exact(M: SparseMat) -> int:
    """Exact rank over the rationals (fraction-free sparse elimination)."""
    if M.is_zero():
        return 0
    # work on the side with fewer rows
    if M.nrows > M.ncols:
        M = M.transpose()
    colcount: dict[int, int] = {}
    for r in M.rows.values():
        for j in r:
            colcount[j] = colcount.get(j, 0) + 1
    order = {j: k for k, j in enumerate(sorted(colcount, key=lambda j: (colcount[j], j)))}
    pivots: dict[int, dict[int, int]] = {}
    rows = sorted(M.rows.values(), key=len)
    for r in rows:
        cur = {order[j]: v for j, v in _integer_row(r).items()}
        while cur:
            lead = min(cur)
            piv = pivots.get(lead)
            if piv is None:
                pivots[lead] = cur
                break
            a = piv[lead]
            b = cur[lead]
            g = gcd(a, b)
            fa, fb = a // g, b // g
            new = {j: v * fa for j, v in cur.items()}
            for j, v in piv.items():
                s = new.get(j, 0) - fb * v
                if s:
                    new[j] = s
                else:
                    new.pop(j, None)
            cur = _primitive(new)
    return len(pivots)


class RowReduced:
    """Reduced row echelon form over the rationals, used for solves and kernels."""

    def __init__(self, M: SparseMat, last: int | None = None):
        # columns >= ``last`` become pivots only when nothing else is left
        self.last = M.ncols if last is None else last
        self.ncols = M.ncols
        self.pivots: dict[int, dict[int, Fraction]] = {}  # pivot col -> normalized row (pivot entry 1)
        for i in sorted(M.rows, key=lambda i: len(M.rows[i])):
            self._insert(dict(M.rows[i]))

    def _reduce(self, row: dict[int, Fraction]) -> dict[int, Fraction]:
        # pivot rows hold no other pivot column, so one pass suffices
        row = dict(row)
        for c in [c for c in row if c in self.pivots]:
            v = row.pop(c)
            for j, w in self.pivots[c].items():
                if j == c:
                    continue
                s = row.get(j, 0) - v * w
                if s:
                    row[j] = s
                else:
                    row.pop(j, None)
        return row

    def _insert(self, row: dict[int, Fraction]) -> bool:
        row = self._reduce(row)
        if not row:
            return False
        # smallest-height entry as pivot keeps coefficient growth down
        c = min(row, key=lambda j: (j >= self.last, abs(row[j].numerator) + row[j].denominator, j))
        inv = 1 / row[c]
        row = {j: v * inv for j, v in row.items()}
        for prow in self.pivots.values():
            v = prow.get(c)
            if v:
                for j, w in row.items():
                    s = prow.get(j, 0) - v * w
                    if s:
                        prow[j] = s
                    else:
                        prow.pop(j, None)
        self.pivots[c] = row
        return True

    @property
    def rank(self) -> int:
        return len(self.pivots)


def nullspace(M: SparseMat) -> list[list[Fraction]]:
    """Basis of ``{x : M x = 0}`` as dense vectors."""
    rr = RowReduced(M)
    free = [j for j in range(M.ncols) if j not in rr.pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * M.ncols
        x[f] = Fraction(1)
        for c, row in rr.pivots.items():
            v = row.get(f)
            if v:
                x[c] = -v
        basis.append(x)
    return basis


def solve(M: SparseMat, y: Sequence[Scalar]) -> list[Fraction] | None:
    """Some exact solution of ``M x = y``, or ``None`` when inconsistent."""
    if len(y) != M.nrows:
        raise ValueError(f"rhs length {len(y)} != {M.nrows}")
    aug_col = M.ncols
    rows = {i: dict(r) for i, r in M.rows.items()}
    for i, v in enumerate(y):
        if v != 0:
            rows.setdefault(i, {})[aug_col] = _frac(v)
    A = SparseMat(M.nrows, M.ncols + 1, rows)
    rr = RowReduced(A, last=aug_col)
    if aug_col in rr.pivots:
        return None
    x = [Fraction(0)] * M.ncols
    for c, row in rr.pivots.items():
        x[c] = row.get(aug_col, Fraction(0))
    return x


def in_column_space(M: SparseMat, y: Sequence[Scalar]) -> bool:
    return solve(M, y) is not None

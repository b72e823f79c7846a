"""Sparse exact linear algebra over the rationals.

Matrices are stored row-wise as ``{row: {col: value}}`` with values that are
``int`` or ``fractions.Fraction``; no explicit zeros are kept.  Everything here
is exact, there is no floating point.
"""

from __future__ import annotations

import heapq
import math
from fractions import Fraction
from numbers import Rational
from typing import Iterable, NamedTuple, Sequence


def as_rational(x) -> Rational:
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else x
    if isinstance(x, str):
        return as_rational(Fraction(x))
    if isinstance(x, Rational):
        return as_rational(Fraction(x.numerator, x.denominator))
    raise TypeError(f"not an exact rational: {x!r}")


def format_rational(x) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


class Inertia(NamedTuple):
    positive: int
    negative: int
    zero: int

    @property
    def signature(self) -> int:
        return self.positive - self.negative


class QMatrix:
    """Sparse rational matrix."""

    __slots__ = ("nrows", "ncols", "rows")

    def __init__(self, nrows: int, ncols: int, rows: dict | None = None):
        self.nrows = nrows
        self.ncols = ncols
        self.rows: dict[int, dict[int, Rational]] = rows if rows is not None else {}

    # construction -------------------------------------------------------
    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> QMatrix:
        return cls(nrows, ncols)

    @classmethod
    def identity(cls, n: int) -> QMatrix:
        return cls(n, n, {i: {i: 1} for i in range(n)})

    @classmethod
    def from_dense(cls, data: Sequence[Sequence], ncols: int | None = None) -> QMatrix:
        nrows = len(data)
        if ncols is None:
            ncols = len(data[0]) if nrows else 0
        rows = {}
        for i, row in enumerate(data):
            if len(row) != ncols:
                raise ValueError("ragged dense matrix")
            r = {j: as_rational(v) for j, v in enumerate(row) if v != 0}
            if r:
                rows[i] = r
        return cls(nrows, ncols, rows)

    @classmethod
    def from_entries(cls, nrows: int, ncols: int, entries: Iterable) -> QMatrix:
        """Build from ``(i, j, value)`` triples; repeated positions are summed."""
        m = cls(nrows, ncols)
        for i, j, v in entries:
            m.add_to(i, j, v)
        return m

    @classmethod
    def diag(cls, values: Sequence) -> QMatrix:
        n = len(values)
        return cls(n, n, {i: {i: as_rational(v)} for i, v in enumerate(values) if v != 0})

    def copy(self) -> QMatrix:
        return QMatrix(self.nrows, self.ncols, {i: dict(r) for i, r in self.rows.items()})

    # element access -----------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def __getitem__(self, ij: tuple[int, int]):
        i, j = ij
        return self.rows.get(i, {}).get(j, 0)

    def add_to(self, i: int, j: int, v) -> None:
        if not (0 <= i < self.nrows and 0 <= j < self.ncols):
            raise IndexError((i, j))
        if v == 0:
            return
        row = self.rows.setdefault(i, {})
        s = row.get(j, 0) + v
        if s == 0:
            del row[j]
            if not row:
                del self.rows[i]
        else:
            row[j] = s

    def nnz(self) -> int:
        return sum(len(r) for r in self.rows.values())

    def items(self):
        for i in sorted(self.rows):
            row = self.rows[i]
            for j in sorted(row):
                yield i, j, row[j]

    def to_dense(self) -> list[list]:
        out = [[0] * self.ncols for _ in range(self.nrows)]
        for i, row in self.rows.items():
            for j, v in row.items():
                out[i][j] = v
        return out

    def column(self, j: int) -> dict[int, Rational]:
        return {i: r[j] for i, r in self.rows.items() if j in r}

    # algebra ------------------------------------------------------------
    @property
    def T(self) -> QMatrix:
        t: dict[int, dict[int, Rational]] = {}
        for i, row in self.rows.items():
            for j, v in row.items():
                t.setdefault(j, {})[i] = v
        return QMatrix(self.ncols, self.nrows, t)

    def _cleared(self) -> tuple[dict[int, dict[int, int]], int]:
        """Integer rows and the common denominator ``D`` with ``self = rows / D``."""
        den = 1
        for row in self.rows.values():
            for v in row.values():
                q = v.denominator
                if den % q:
                    den = den * q // math.gcd(den, q)
        if den == 1:
            return self.rows, 1
        return {i: {j: v.numerator * (den // v.denominator) for j, v in r.items()} for i, r in self.rows.items()}, den

    def __matmul__(self, other: QMatrix) -> QMatrix:
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        # multiply integer numerators, divide once per entry
        arows, da = self._cleared()
        orows, db = other._cleared()
        den = da * db
        out = {}
        for i, row in arows.items():
            acc: dict[int, int] = {}
            for k, a in row.items():
                brow = orows.get(k)
                if brow is None:
                    continue
                for j, b in brow.items():
                    acc[j] = acc.get(j, 0) + a * b
            if den == 1:
                acc = {j: v for j, v in acc.items() if v}
            else:
                acc = {j: as_rational(Fraction(v, den)) for j, v in acc.items() if v}
            if acc:
                out[i] = acc
        return QMatrix(self.nrows, other.ncols, out)

    def _combine(self, other: QMatrix, sign: int) -> QMatrix:
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        out = {i: dict(r) for i, r in self.rows.items()}
        for i, row in other.rows.items():
            target = out.setdefault(i, {})
            for j, v in row.items():
                s = target.get(j, 0) + sign * v
                if s == 0:
                    target.pop(j, None)
                else:
                    target[j] = s
            if not target:
                del out[i]
        return QMatrix(self.nrows, self.ncols, out)

    def __add__(self, other: QMatrix) -> QMatrix:
        return self._combine(other, 1)

    def __sub__(self, other: QMatrix) -> QMatrix:
        return self._combine(other, -1)

    def __neg__(self) -> QMatrix:
        return self.scale(-1)

    def scale(self, c) -> QMatrix:
        c = as_rational(c)
        if c == 0:
            return QMatrix(self.nrows, self.ncols)
        return QMatrix(
            self.nrows, self.ncols, {i: {j: c * v for j, v in r.items()} for i, r in self.rows.items()}
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, QMatrix):
            return NotImplemented
        return self.shape == other.shape and self.rows == other.rows

    def __repr__(self) -> str:
        return f"QMatrix({self.nrows}x{self.ncols}, nnz={self.nnz()})"

    def trace(self) -> Rational:
        if self.nrows != self.ncols:
            raise ValueError("trace of a non-square matrix")
        return sum((r[i] for i, r in self.rows.items() if i in r), 0)

    def is_symmetric(self) -> bool:
        if self.nrows != self.ncols:
            return False
        for i, row in self.rows.items():
            for j, v in row.items():
                if self.rows.get(j, {}).get(i, 0) != v:
                    return False
        return True

    def is_integral(self) -> bool:
        return all(
            isinstance(v, int) or v.denominator == 1 for r in self.rows.values() for v in r.values()
        )

    def submatrix(self, row_idx: Sequence[int], col_idx: Sequence[int]) -> QMatrix:
        cpos = {c: k for k, c in enumerate(col_idx)}
        out = {}
        for a, i in enumerate(row_idx):
            row = self.rows.get(i)
            if not row:
                continue
            r = {cpos[j]: v for j, v in row.items() if j in cpos}
            if r:
                out[a] = r
        return QMatrix(len(row_idx), len(col_idx), out)

    def shifted(self, c) -> QMatrix:
        """``self - c * I``."""
        if self.nrows != self.ncols:
            raise ValueError("shift of a non-square matrix")
        c = as_rational(c)
        m = self.copy()
        if c != 0:
            for i in range(self.nrows):
                m.add_to(i, i, -c)
        return m

    def max_abs_row_sum(self) -> Rational:
        return max((sum(abs(v) for v in r.values()) for r in self.rows.values()), default=0)


def block(blocks: Sequence[Sequence[QMatrix | None]], row_sizes: Sequence[int], col_sizes: Sequence[int]) -> QMatrix:
    """Assemble a block matrix; ``None`` blocks are zero."""
    roff = [0]
    for s in row_sizes:
        roff.append(roff[-1] + s)
    coff = [0]
    for s in col_sizes:
        coff.append(coff[-1] + s)
    out = QMatrix(roff[-1], coff[-1])
    for bi, brow in enumerate(blocks):
        for bj, b in enumerate(brow):
            if b is None:
                continue
            if b.shape != (row_sizes[bi], col_sizes[bj]):
                raise ValueError(f"block ({bi},{bj}) has shape {b.shape}")
            for i, row in b.rows.items():
                target = out.rows.setdefault(roff[bi] + i, {})
                for j, v in row.items():
                    target[coff[bj] + j] = v
    return out


# ---------------------------------------------------------------------------
# inertia by symmetric congruence


def ldl_inertia(m: QMatrix) -> tuple[Inertia, Rational]:
    """Inertia and determinant of a symmetric matrix by exact congruence.

    Symmetric elimination with 1x1 diagonal pivots chosen by minimum degree;
    when every remaining diagonal entry is zero but the block is not, a
    hyperbolic 2x2 pivot ``[[0, a], [a, 0]]`` is eliminated instead.
    """
    if not m.is_symmetric():
        raise ValueError("inertia requires an exactly symmetric matrix")
    n = m.nrows
    a = {i: dict(r) for i, r in m.rows.items()}
    pos = neg = 0
    det: Rational = 1
    heap = [(len(r), i) for i, r in a.items() if r.get(i, 0) != 0]
    heapq.heapify(heap)

    def eliminate(i: int) -> None:
        row = a.pop(i)
        d = row.pop(i)
        nbrs = list(row.items())
        for u, au in nbrs:
            ru = a[u]
            del ru[i]
            f = Fraction(au) / d
            for v, av in nbrs:
                s = ru.get(v, 0) - f * av
                if s == 0:
                    ru.pop(v, None)
                else:
                    ru[v] = s
        for u, _ in nbrs:
            ru = a[u]
            if not ru:
                del a[u]
            elif ru.get(u, 0) != 0:
                heapq.heappush(heap, (len(ru), u))

    while a:
        pivot = None
        while heap:
            deg, i = heapq.heappop(heap)
            r = a.get(i)
            if r is not None and r.get(i, 0) != 0 and len(r) == deg:
                pivot = i
                break
        if pivot is not None:
            d = a[pivot][pivot]
            det *= d
            if d > 0:
                pos += 1
            else:
                neg += 1
            eliminate(pivot)
            continue
        # every remaining diagonal entry vanishes
        i = min(a)
        j = min(k for k in a[i] if k != i)
        x = a[i][j]
        ri = a.pop(i)
        rj = a.pop(j)
        ri.pop(j)
        rj.pop(i)
        ri.pop(i, None)
        rj.pop(j, None)
        for u in set(ri) | set(rj):
            ru = a[u]
            ru.pop(i, None)
            ru.pop(j, None)
        touched = set(ri) | set(rj)
        for u in touched:
            bi_u = ri.get(u, 0)
            bj_u = rj.get(u, 0)
            ru = a[u]
            for v in touched:
                delta = Fraction(bi_u * rj.get(v, 0) + bj_u * ri.get(v, 0)) / x
                if delta == 0:
                    continue
                s = ru.get(v, 0) - delta
                if s == 0:
                    ru.pop(v, None)
                else:
                    ru[v] = s
        for u in touched:
            ru = a[u]
            if not ru:
                del a[u]
            elif ru.get(u, 0) != 0:
                heapq.heappush(heap, (len(ru), u))
        pos += 1
        neg += 1
        det *= -x * x
    zero = n - pos - neg
    if zero:
        det = 0
    return Inertia(pos, neg, zero), as_rational(det)


def inertia(m: QMatrix) -> Inertia:
    """Counts of positive, negative and zero eigenvalues, computed exactly."""
    return ldl_inertia(m)[0]


def det_symmetric(m: QMatrix) -> Rational:
    return ldl_inertia(m)[1]


def count_eigenvalues_at_most(m: QMatrix, c) -> int:
    """Number of eigenvalues ``<= c`` of a symmetric matrix."""
    ine = inertia(m.shifted(c))
    return ine.negative + ine.zero


# ---------------------------------------------------------------------------
# row reduction


def echelon(m: QMatrix, reduced: bool = True) -> dict[int, dict[int, Rational]]:
    """Sparse (reduced) row echelon form.

    Returns ``{pivot_col: row}`` with unit leading entries.  The forward pass
    picks the shortest available row for each column; back substitution runs
    over pivots in descending order so each pivot row is reduced only once.
    """
    rows = {i: dict(r) for i, r in m.rows.items()}
    col_index: dict[int, set[int]] = {}
    for i, r in rows.items():
        for j in r:
            col_index.setdefault(j, set()).add(i)
    pivots: dict[int, dict[int, Rational]] = {}
    for c in range(m.ncols):
        holders = col_index.get(c)
        if not holders:
            continue
        p = min(holders, key=lambda i: (len(rows[i]), i))
        prow = rows.pop(p)
        for j in prow:
            col_index[j].discard(p)
        lead = prow[c]
        if lead != 1:
            inv = 1 / Fraction(lead)
            for j in prow:
                prow[j] = as_rational(prow[j] * inv)
        for i in list(holders):
            r = rows[i]
            f = r[c]
            for j, v in prow.items():
                s = r.get(j, 0) - f * v
                if s == 0:
                    if j in r:
                        del r[j]
                        col_index[j].discard(i)
                else:
                    if j not in r:
                        col_index.setdefault(j, set()).add(i)
                    r[j] = s
        pivots[c] = prow
    if reduced:
        for c in sorted(pivots, reverse=True):
            row = pivots[c]
            for j in [j for j in row if j != c and j in pivots]:
                f = row.get(j, 0)
                if f == 0:
                    continue
                for jj, v in pivots[j].items():
                    s = row.get(jj, 0) - f * v
                    if s == 0:
                        row.pop(jj, None)
                    else:
                        row[jj] = s
    return pivots


def rank(m: QMatrix) -> int:
    return len(echelon(m, reduced=False))


def nullspace(m: QMatrix) -> QMatrix:
    """Basis of the right kernel as the columns of an ``ncols x d`` matrix."""
    pivots = echelon(m)
    free = [j for j in range(m.ncols) if j not in pivots]
    fpos = {f: k for k, f in enumerate(free)}
    basis = QMatrix(m.ncols, len(free))
    for f, k in fpos.items():
        basis.add_to(f, k, 1)
    for c, row in pivots.items():
        for j, v in row.items():
            if j != c:
                basis.add_to(c, fpos[j], -v)
    return basis


# ---------------------------------------------------------------------------
# characteristic polynomial


def charpoly(m: QMatrix) -> list[Rational]:
    """Coefficients ``[c_0, ..., c_n]`` of ``det(x I - m)`` (ascending powers).

    Hessenberg reduction followed by the standard recurrence; O(n^3) exact.
    """
    n = m.nrows
    if n != m.ncols:
        raise ValueError("charpoly of a non-square matrix")
    h = [[Fraction(v) for v in row] for row in m.to_dense()]
    for mcol in range(1, n - 1):
        piv = None
        for i in range(mcol, n):
            if h[i][mcol - 1] != 0:
                piv = i
                break
        if piv is None:
            continue
        if piv != mcol:
            h[piv], h[mcol] = h[mcol], h[piv]
            for row in h:
                row[piv], row[mcol] = row[mcol], row[piv]
        t = h[mcol][mcol - 1]
        for i in range(mcol + 1, n):
            u = h[i][mcol - 1] / t
            if u == 0:
                continue
            hi, hm = h[i], h[mcol]
            for j in range(n):
                hi[j] -= u * hm[j]
            for row in h:
                row[mcol] += u * row[i]
    # p[k] = charpoly of the leading k x k block, as coefficient lists
    p: list[list[Fraction]] = [[Fraction(1)]]
    for k in range(1, n + 1):
        hk = h[k - 1][k - 1]
        prev = p[k - 1]
        new = [Fraction(0)] + prev  # x * p_{k-1}
        for d, c in enumerate(prev):
            new[d] -= hk * c
        t = Fraction(1)
        for i in range(1, k):
            t *= h[k - i][k - i - 1]
            coef = t * h[k - i - 1][k - 1]
            if coef == 0:
                continue
            for d, c in enumerate(p[k - i - 1]):
                new[d] -= coef * c
        p.append(new)
    return [as_rational(c) for c in p[n]]

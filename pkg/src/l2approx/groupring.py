"""Exact arithmetic in the rational group ring and matrices over it."""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping

from .groups import Element, Group, GroupError, TowerLevel
from .linalg import QMatrix, as_rational, format_rational


class GroupRingElement:
    """Finitely supported map ``group element -> rational``."""

    __slots__ = ("group", "terms")

    def __init__(self, group: Group, terms: Mapping[Element, object] | None = None):
        self.group = group
        clean: dict[Element, Rational] = {}
        if terms:
            for g, c in terms.items():
                c = as_rational(c)
                if c != 0:
                    clean[group.check(g)] = c
        self.terms = clean

    @classmethod
    def _raw(cls, group: Group, terms: dict) -> GroupRingElement:
        obj = cls.__new__(cls)
        obj.group = group
        obj.terms = terms
        return obj

    @classmethod
    def scalar(cls, group: Group, c) -> GroupRingElement:
        return cls(group, {group.identity: c})

    @classmethod
    def monomial(cls, group: Group, g: Element, c=1) -> GroupRingElement:
        return cls(group, {g: c})

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, g: Element) -> Rational:
        return self.terms.get(g, 0)

    def identity_coefficient(self) -> Rational:
        return self.terms.get(self.group.identity, 0)

    def support(self) -> list[Element]:
        return sorted(self.terms, key=self.group.sort_key)

    def l1_norm(self) -> Rational:
        return sum((abs(c) for c in self.terms.values()), 0)

    def _same(self, other: GroupRingElement) -> None:
        if other.group != self.group:
            raise GroupError("group ring elements over different groups")

    def __add__(self, other):
        if not isinstance(other, GroupRingElement):
            other = GroupRingElement.scalar(self.group, other)
        self._same(other)
        out = dict(self.terms)
        for g, c in other.terms.items():
            s = out.get(g, 0) + c
            if s == 0:
                out.pop(g, None)
            else:
                out[g] = s
        return GroupRingElement._raw(self.group, out)

    __radd__ = __add__

    def __neg__(self):
        return GroupRingElement._raw(self.group, {g: -c for g, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, GroupRingElement):
            other = GroupRingElement.scalar(self.group, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, GroupRingElement):
            c = as_rational(other)
            if c == 0:
                return GroupRingElement._raw(self.group, {})
            return GroupRingElement._raw(self.group, {g: c * v for g, v in self.terms.items()})
        self._same(other)
        mul = self.group.mul
        out: dict[Element, Rational] = {}
        for g, a in self.terms.items():
            for h, b in other.terms.items():
                w = mul(g, h)
                out[w] = out.get(w, 0) + a * b
        return GroupRingElement._raw(self.group, {w: c for w, c in out.items() if c != 0})

    def __rmul__(self, other):
        # scalars commute with everything
        return self.__mul__(other)

    def involve(self) -> GroupRingElement:
        """``sum c_w w  ->  sum c_w w^-1``."""
        inv = self.group.inv
        return GroupRingElement._raw(self.group, {inv(g): c for g, c in self.terms.items()})

    def __eq__(self, other):
        if isinstance(other, GroupRingElement):
            return self.group == other.group and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self == GroupRingElement.scalar(self.group, other)
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = [f"{format_rational(c)}*{g!r}" for g, c in sorted(self.terms.items(), key=lambda t: self.group.sort_key(t[0]))]
        return " + ".join(parts)

    def to_json(self) -> list[dict]:
        return [
            {"g": self.group.to_json(g), "c": format_rational(self.terms[g])}
            for g in self.support()
        ]

    @classmethod
    def from_json(cls, group: Group, terms: Iterable[dict]) -> GroupRingElement:
        out: dict[Element, Rational] = {}
        for t in terms:
            g = group.coerce(t["g"])
            c = t["c"]
            if isinstance(c, float):
                raise ValueError("coefficients must be exact rationals, not floats")
            c = as_rational(Fraction(c) if isinstance(c, str) else c)
            out[g] = out.get(g, 0) + c
        return cls(group, out)


def laurent(group: Group, coeffs: Mapping) -> GroupRingElement:
    """Element of ``Q[Z^n]`` from ``{exponent (int or tuple): coefficient}``."""
    terms = {}
    for e, c in coeffs.items():
        g = group.coerce(e)
        terms[g] = terms.get(g, 0) + as_rational(c)
    return GroupRingElement(group, terms)


class GroupRingMatrix:
    """``rows x cols`` matrix over ``Q Gamma`` with sparse entry storage."""

    __slots__ = ("group", "nrows", "ncols", "entries")

    def __init__(self, group: Group, nrows: int, ncols: int, entries: Mapping[tuple[int, int], GroupRingElement] | None = None):
        self.group = group
        self.nrows = nrows
        self.ncols = ncols
        self.entries: dict[tuple[int, int], GroupRingElement] = {}
        if entries:
            for (i, j), x in entries.items():
                if not (0 <= i < nrows and 0 <= j < ncols):
                    raise IndexError((i, j))
                if not isinstance(x, GroupRingElement):
                    x = GroupRingElement.scalar(group, x)
                if x.group != group:
                    raise GroupError("matrix entry over a different group")
                if not x.is_zero():
                    self.entries[(i, j)] = x

    @classmethod
    def from_rows(cls, group: Group, rows: list[list], ncols: int | None = None) -> GroupRingMatrix:
        nrows = len(rows)
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        ents = {}
        for i, row in enumerate(rows):
            if len(row) != ncols:
                raise ValueError("ragged matrix")
            for j, x in enumerate(row):
                ents[(i, j)] = x
        return cls(group, nrows, ncols, ents)

    @classmethod
    def zeros(cls, group: Group, nrows: int, ncols: int) -> GroupRingMatrix:
        return cls(group, nrows, ncols)

    @classmethod
    def identity(cls, group: Group, n: int) -> GroupRingMatrix:
        one = GroupRingElement.scalar(group, 1)
        return cls(group, n, n, {(i, i): one for i in range(n)})

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def __getitem__(self, ij) -> GroupRingElement:
        x = self.entries.get(ij)
        return x if x is not None else GroupRingElement._raw(self.group, {})

    def is_zero(self) -> bool:
        return not self.entries

    def _check(self, other: GroupRingMatrix) -> None:
        if other.group != self.group:
            raise GroupError("matrices over different groups")

    def __add__(self, other: GroupRingMatrix) -> GroupRingMatrix:
        self._check(other)
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} + {other.shape}")
        out = dict(self.entries)
        for ij, x in other.entries.items():
            out[ij] = out[ij] + x if ij in out else x
        return GroupRingMatrix(self.group, self.nrows, self.ncols, out)

    def __neg__(self) -> GroupRingMatrix:
        return GroupRingMatrix(self.group, self.nrows, self.ncols, {ij: -x for ij, x in self.entries.items()})

    def __sub__(self, other: GroupRingMatrix) -> GroupRingMatrix:
        return self + (-other)

    def scale(self, c) -> GroupRingMatrix:
        return GroupRingMatrix(self.group, self.nrows, self.ncols, {ij: x * c for ij, x in self.entries.items()})

    def __matmul__(self, other: GroupRingMatrix) -> GroupRingMatrix:
        self._check(other)
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        by_row: dict[int, list[tuple[int, GroupRingElement]]] = {}
        for (k, j), y in other.entries.items():
            by_row.setdefault(k, []).append((j, y))
        out: dict[tuple[int, int], GroupRingElement] = {}
        for (i, k), x in self.entries.items():
            for j, y in by_row.get(k, ()):
                p = x * y
                out[(i, j)] = out[(i, j)] + p if (i, j) in out else p
        return GroupRingMatrix(self.group, self.nrows, other.ncols, out)

    def adjoint(self) -> GroupRingMatrix:
        """``A*_{ij} = involve(A_{ji})``."""
        return GroupRingMatrix(
            self.group, self.ncols, self.nrows, {(j, i): x.involve() for (i, j), x in self.entries.items()}
        )

    def is_selfadjoint(self) -> bool:
        return self.nrows == self.ncols and self == self.adjoint()

    def vn_trace(self) -> Rational:
        """Sum of the identity coefficients of the diagonal entries."""
        if self.nrows != self.ncols:
            raise ValueError("von Neumann trace of a non-square matrix")
        return sum((x.identity_coefficient() for (i, j), x in self.entries.items() if i == j), 0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GroupRingMatrix):
            return NotImplemented
        return self.group == other.group and self.shape == other.shape and self.entries == other.entries

    def __repr__(self):
        return f"GroupRingMatrix({self.nrows}x{self.ncols} over {self.group!r}, {len(self.entries)} nonzero entries)"

    def is_integral(self) -> bool:
        return all(
            Fraction(c).denominator == 1 for x in self.entries.values() for c in x.terms.values()
        )

    def support_width(self) -> int:
        """Largest word length occurring in any entry."""
        return max(
            (self.group.word_length(g) for x in self.entries.values() for g in x.terms), default=0
        )

    def push(self, level: TowerLevel) -> QMatrix:
        """Rational matrix of ``Q[G_k] (x)_{Q Gamma}`` this matrix.

        Block ``(i, j)`` is ``sum_w c_w rep(project(w))``; the basis of the
        pushed module is ``(i, x)`` at position ``i * |G_k| + index(x)``.
        """
        if level.group != self.group:
            raise GroupError("tower level belongs to a different group")
        n = level.order
        out = QMatrix(self.nrows * n, self.ncols * n)
        rows = out.rows
        for (i, j), x in self.entries.items():
            roff, coff = i * n, j * n
            for w, c in x.terms.items():
                perm = level.right_multiplication(level.project(w))
                for xi in range(n):
                    r = rows.setdefault(roff + xi, {})
                    col = coff + perm[xi]
                    s = r.get(col, 0) + c
                    if s == 0:
                        del r[col]
                    else:
                        r[col] = s
        for key in [key for key, r in rows.items() if not r]:
            del rows[key]
        return out

    def norm_bound(self) -> Rational:
        """Schur bound ``sqrt(R C)`` rounded up to a rational.

        ``R``/``C`` are the largest row/column sums of coefficient l1 norms.
        This dominates the operator norm on ``l^2(Gamma)^s`` and on every
        finite quotient, and on every coordinate truncation.
        """
        if not self.entries:
            return 0
        rsum: dict[int, Rational] = {}
        csum: dict[int, Rational] = {}
        for (i, j), x in self.entries.items():
            n1 = x.l1_norm()
            rsum[i] = rsum.get(i, 0) + n1
            csum[j] = csum.get(j, 0) + n1
        prod = Fraction(max(rsum.values())) * Fraction(max(csum.values()))
        return _rational_sqrt_ceil(prod)

    def to_json(self) -> dict:
        return {
            "rows": self.nrows,
            "cols": self.ncols,
            "entries": [[self[(i, j)].to_json() for j in range(self.ncols)] for i in range(self.nrows)],
        }

    @classmethod
    def from_json(cls, group: Group, d: dict | list) -> GroupRingMatrix:
        if isinstance(d, list):
            d = {"entries": d}
        entries = d.get("entries", [])
        nrows = int(d.get("rows", len(entries)))
        ncols = int(d.get("cols", len(entries[0]) if entries else 0))
        if len(entries) not in (0, nrows):
            raise ValueError("row count does not match 'rows'")
        ents = {}
        for i, row in enumerate(entries):
            if len(row) != ncols:
                raise ValueError(f"row {i} has {len(row)} entries, expected {ncols}")
            for j, terms in enumerate(row):
                x = GroupRingElement.from_json(group, terms)
                if not x.is_zero():
                    ents[(i, j)] = x
        return cls(group, nrows, ncols, ents)


def _rational_sqrt_ceil(q: Fraction) -> Rational:
    """Smallest ``p/d`` with the denominator of ``q`` that is ``>= sqrt(q)``."""
    q = Fraction(q)
    if q <= 0:
        return 0
    num, den = q.numerator, q.denominator
    # sqrt(num/den) = sqrt(num*den)/den
    s = math.isqrt(num * den)
    if s * s < num * den:
        s += 1
    return as_rational(Fraction(s, den))


def regular_representation(level: TowerLevel, h) -> QMatrix:
    return level.regular_representation(h)

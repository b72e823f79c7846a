"""Based free chain complexes over ``Q Gamma`` and symmetric (Poincare) structures.

Matrices act on column vectors: ``c_p`` has shape ``r_{p-1} x r_p``.  The dual
complex of an ``N``-dimensional complex has ``C_{N-p}`` in degree ``p`` and
differential ``(c_{N-p+1})^*``.  A duality map ``f`` has components
``f_p : C_{N-p} -> C_p`` and must satisfy ``c_p f_p = f_{p-1} (c_{N-p+1})^*``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .groupring import GroupRingMatrix
from .groups import Group, GroupError


class ChainComplexError(ValueError):
    pass


@dataclass(frozen=True)
class FreeComplex:
    group: Group
    ranks: tuple[int, ...]
    differentials: tuple[GroupRingMatrix, ...]  # differentials[p-1] = c_p

    def __post_init__(self):
        ranks = tuple(int(r) for r in self.ranks)
        object.__setattr__(self, "ranks", ranks)
        object.__setattr__(self, "differentials", tuple(self.differentials))
        if any(r < 0 for r in ranks):
            raise ChainComplexError("ranks must be non-negative")
        if len(self.differentials) != max(len(ranks) - 1, 0):
            raise ChainComplexError(f"expected {len(ranks) - 1} differentials, got {len(self.differentials)}")
        for p, c in enumerate(self.differentials, start=1):
            if c.group != self.group:
                raise GroupError(f"differential c_{p} is over a different group")
            if c.shape != (ranks[p - 1], ranks[p]):
                raise ChainComplexError(f"c_{p} has shape {c.shape}, expected {(ranks[p - 1], ranks[p])}")

    @classmethod
    def build(cls, group: Group, ranks: Sequence[int], differentials: Sequence[GroupRingMatrix]) -> FreeComplex:
        return cls(group, tuple(ranks), tuple(differentials))

    @property
    def dim(self) -> int:
        return len(self.ranks) - 1

    def rank(self, p: int) -> int:
        return self.ranks[p] if 0 <= p <= self.dim else 0

    def d(self, p: int) -> GroupRingMatrix:
        """``c_p : C_p -> C_{p-1}``; zero outside ``1..N``."""
        if 1 <= p <= self.dim:
            return self.differentials[p - 1]
        return GroupRingMatrix.zeros(self.group, self.rank(p - 1), self.rank(p))

    def square_zero_violations(self) -> list[int]:
        """Degrees ``p`` with ``c_p c_{p+1} != 0``."""
        return [p for p in range(1, self.dim) if not (self.d(p) @ self.d(p + 1)).is_zero()]

    def laplacian(self, p: int) -> GroupRingMatrix:
        up = self.d(p + 1)
        down = self.d(p)
        return up @ up.adjoint() + down.adjoint() @ down

    def push(self, level) -> list:
        return [c.push(level) for c in self.differentials]


def dual(c: FreeComplex) -> FreeComplex:
    n = c.dim
    ranks = tuple(c.ranks[n - p] for p in range(n + 1))
    diffs = tuple(c.d(n - p + 1).adjoint() for p in range(1, n + 1))
    return FreeComplex(c.group, ranks, diffs)


def suspension(c: FreeComplex) -> FreeComplex:
    """Shift up by one degree with negated differentials; degree 0 becomes empty."""
    if not c.ranks:
        return c
    ranks = (0,) + c.ranks
    diffs = (GroupRingMatrix.zeros(c.group, 0, c.ranks[0]),) + tuple(-x for x in c.differentials)
    return FreeComplex(c.group, ranks, diffs)


@dataclass(frozen=True)
class ChainMap:
    source: FreeComplex
    target: FreeComplex
    maps: tuple[GroupRingMatrix, ...]  # maps[p] : source_p -> target_p

    def __post_init__(self):
        object.__setattr__(self, "maps", tuple(self.maps))

    def component(self, p: int) -> GroupRingMatrix:
        if 0 <= p < len(self.maps):
            return self.maps[p]
        return GroupRingMatrix.zeros(self.source.group, self.target.rank(p), self.source.rank(p))

    def violations(self) -> list[int]:
        bad = []
        top = max(self.source.dim, self.target.dim)
        for p in range(0, top + 1):
            f = self.component(p)
            if f.shape != (self.target.rank(p), self.source.rank(p)):
                bad.append(p)
                continue
            if p >= 1 and not (self.target.d(p) @ f - self.component(p - 1) @ self.source.d(p)).is_zero():
                bad.append(p)
        return bad


def cone(f: ChainMap) -> FreeComplex:
    """Mapping cone: ``cone_p = D_p + C_{p-1}`` with differential ``[[d_D, f], [0, -d_C]]``."""
    bad = f.violations()
    if bad:
        raise ChainComplexError(f"not a chain map in degrees {bad}")
    src, tgt = f.source, f.target
    g = tgt.group
    top = max(tgt.dim, src.dim + 1)
    ranks = [tgt.rank(p) + src.rank(p - 1) for p in range(top + 1)]
    diffs = []
    for p in range(1, top + 1):
        a, b = tgt.rank(p), src.rank(p - 1)
        a1, b1 = tgt.rank(p - 1), src.rank(p - 2)
        m = {}
        dD = tgt.d(p)
        for (i, j), x in dD.entries.items():
            m[(i, j)] = x
        fp = f.component(p - 1)
        for (i, j), x in fp.entries.items():
            m[(i, a + j)] = x
        dC = src.d(p - 1)
        for (i, j), x in dC.entries.items():
            m[(a1 + i, a + j)] = -x
        diffs.append(GroupRingMatrix(g, a1 + b1, a + b, m))
    return FreeComplex(g, tuple(ranks), tuple(diffs))


def direct_sum_complex(a: FreeComplex, b: FreeComplex) -> FreeComplex:
    if a.group != b.group:
        raise GroupError("direct sum of complexes over different groups")
    top = max(a.dim, b.dim)
    ranks = tuple(a.rank(p) + b.rank(p) for p in range(top + 1))
    diffs = tuple(block_diag(a.d(p), b.d(p)) for p in range(1, top + 1))
    return FreeComplex(a.group, ranks, diffs)


def block_diag(x: GroupRingMatrix, y: GroupRingMatrix) -> GroupRingMatrix:
    m = dict(x.entries)
    for (i, j), v in y.entries.items():
        m[(x.nrows + i, x.ncols + j)] = v
    return GroupRingMatrix(x.group, x.nrows + y.nrows, x.ncols + y.ncols, m)


# ---------------------------------------------------------------------------
# symmetric structures


@dataclass
class ValidationReport:
    ok: bool = True
    violations: list[dict] = field(default_factory=list)

    def fail(self, kind: str, degree: int | None = None, message: str = "") -> None:
        self.ok = False
        self.violations.append({"kind": kind, "degree": degree, "message": message})

    def merge(self, other: ValidationReport) -> None:
        if not other.ok:
            self.ok = False
        self.violations.extend(other.violations)

    def to_json(self) -> dict:
        return {"ok": self.ok, "violations": self.violations}


@dataclass(frozen=True)
class SymmetricComplex:
    """Free complex with a duality chain map ``f : C^{N-*} -> C_*``.

    The chain homotopy ``f ~ f*`` is not carried; its testable consequence,
    symmetry of the induced harmonic pairing, is checked per quotient level.
    """

    base: FreeComplex
    duality: tuple[GroupRingMatrix, ...]  # duality[p] = f_p, shape r_p x r_{N-p}

    def __post_init__(self):
        object.__setattr__(self, "duality", tuple(self.duality))
        n = self.base.dim
        if len(self.duality) != n + 1:
            raise ChainComplexError(f"expected {n + 1} duality components, got {len(self.duality)}")
        for p, f in enumerate(self.duality):
            if f.group != self.base.group:
                raise GroupError(f"duality component f_{p} is over a different group")
            if f.shape != (self.base.rank(p), self.base.rank(n - p)):
                raise ChainComplexError(
                    f"f_{p} has shape {f.shape}, expected {(self.base.rank(p), self.base.rank(n - p))}"
                )

    @property
    def group(self) -> Group:
        return self.base.group

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def middle(self) -> int:
        if self.dim % 4:
            raise ChainComplexError(f"signature needs dimension divisible by 4, got {self.dim}")
        return self.dim // 2

    def f(self, p: int) -> GroupRingMatrix:
        if 0 <= p <= self.dim:
            return self.duality[p]
        return GroupRingMatrix.zeros(self.group, self.base.rank(p), self.base.rank(self.dim - p))

    def chain_map_violations(self) -> list[int]:
        n = self.dim
        c = self.base
        bad = []
        for p in range(1, n + 1):
            lhs = c.d(p) @ self.f(p)
            rhs = self.f(p - 1) @ c.d(n - p + 1).adjoint()
            if lhs != rhs:
                bad.append(p)
        return bad


def validate(s: SymmetricComplex | FreeComplex) -> ValidationReport:
    """Exact checks of ``c^2 = 0`` and of the chain-map condition on ``f``."""
    rep = ValidationReport()
    base = s.base if isinstance(s, SymmetricComplex) else s
    for p in base.square_zero_violations():
        rep.fail("square_zero", p, f"c_{p} c_{p + 1} != 0")
    if isinstance(s, SymmetricComplex):
        for p in s.chain_map_violations():
            rep.fail("chain_map", p, f"c_{p} f_{p} != f_{p - 1} c*_{s.dim - p + 1}")
    return rep


def from_form(a: GroupRingMatrix, n: int = 1) -> SymmetricComplex:
    """Complex concentrated in degree ``2n`` with duality ``f_{2n} = a``."""
    if n < 1:
        raise ChainComplexError("n must be >= 1")
    if a.nrows != a.ncols:
        raise ChainComplexError("form must be square")
    if not a.is_selfadjoint():
        raise ChainComplexError("form is not self-adjoint")
    g = a.group
    dim = 4 * n
    ranks = tuple(a.nrows if p == 2 * n else 0 for p in range(dim + 1))
    diffs = tuple(GroupRingMatrix.zeros(g, ranks[p - 1], ranks[p]) for p in range(1, dim + 1))
    base = FreeComplex(g, ranks, diffs)
    duality = tuple(a if p == 2 * n else GroupRingMatrix.zeros(g, ranks[p], ranks[dim - p]) for p in range(dim + 1))
    return SymmetricComplex(base, duality)


def hyperbolic(d: FreeComplex, dim: int) -> SymmetricComplex:
    """``D + D^{dim-*}`` with the swap duality; its signature vanishes."""
    if d.dim > dim:
        raise ChainComplexError("complex does not fit in the requested dimension")
    g = d.group
    padded = FreeComplex(
        g,
        tuple(d.rank(p) for p in range(dim + 1)),
        tuple(d.d(p) for p in range(1, dim + 1)),
    )
    dd = dual(padded)
    total = direct_sum_complex(padded, dd)
    duality = []
    for p in range(dim + 1):
        a, b = padded.rank(p), padded.rank(dim - p)
        # C_p = D_p + D_{dim-p};  (dual C)_p = D_{dim-p} + D_p
        m = {}
        for i in range(a):
            m[(i, b + i)] = 1
        for i in range(b):
            m[(a + i, i)] = 1
        duality.append(GroupRingMatrix(g, a + b, a + b, m))
    return SymmetricComplex(total, tuple(duality))


def direct_sum(s: SymmetricComplex, t: SymmetricComplex) -> SymmetricComplex:
    if s.dim != t.dim:
        raise ChainComplexError("direct sum of symmetric complexes of different dimensions")
    base = direct_sum_complex(s.base, t.base)
    n = s.dim
    duality = []
    for p in range(n + 1):
        duality.append(block_diag(s.f(p), t.f(p)))
    return SymmetricComplex(base, tuple(duality))


def circle_complex(group: Group) -> FreeComplex:
    """Cellular complex of the universal cover of the circle: ``c_1 = [t - 1]``."""
    from .groupring import GroupRingElement

    if getattr(group, "rank", None) != 1:
        raise GroupError("the circle complex lives over Z")
    t = GroupRingElement.monomial(group, (1,))
    return FreeComplex(group, (1, 1), (GroupRingMatrix.from_rows(group, [[t - 1]]),))


def torus_complex(group: Group) -> FreeComplex:
    """Cellular complex of the plane over ``Z^2``: one 0-cell, two 1-cells, one 2-cell."""
    from .groupring import GroupRingElement

    if getattr(group, "rank", None) != 2:
        raise GroupError("the torus complex lives over Z^2")
    x = GroupRingElement.monomial(group, (1, 0))
    y = GroupRingElement.monomial(group, (0, 1))
    c1 = GroupRingMatrix.from_rows(group, [[x - 1, y - 1]])
    c2 = GroupRingMatrix.from_rows(group, [[1 - y], [x - 1]])
    return FreeComplex(group, (1, 2, 1), (c1, c2))


def zero_complex(group: Group, rank: int, degree: int = 0) -> FreeComplex:
    ranks = tuple(rank if p == degree else 0 for p in range(degree + 1))
    diffs = tuple(GroupRingMatrix.zeros(group, ranks[p - 1], ranks[p]) for p in range(1, degree + 1))
    return FreeComplex(group, ranks, diffs)

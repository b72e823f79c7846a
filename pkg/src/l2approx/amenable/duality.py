"""The cap product with the fundamental class as a group ring operator,
coordinate truncations, and the restriction identity for submanifolds."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from ..chain import SymmetricComplex, validate
from ..groupring import GroupRingElement, GroupRingMatrix
from ..groups import TrivialGroup
from ..linalg import QMatrix
from .cover import Cell, EquivariantComplex, FiniteSubcomplex
from .simplicial import (
    ComplexError,
    SimplicialComplex,
    orient,
    structural_violations,
    validate_homology_manifold,
)


def cap_operator(e: EquivariantComplex, p: int) -> GroupRingMatrix:
    """Cap with the fundamental class on ``p``-cochains.

    ``a -> sum_s eps(s) [front_{n-p}(s) not in L] front_{n-p}(s) <a, back_p(s)>``
    over top simplices ``s`` of the cover, with Alexander-Whitney front and
    back faces in the local ordering.  The result is an ``r_{n-p} x r_p``
    matrix; rows of orbits in ``L`` vanish.
    """
    n = e.dim
    g = e.group
    if not 0 <= p <= n:
        return GroupRingMatrix.zeros(g, e.rank(n - p) if 0 <= n - p <= n else 0, e.rank(p) if 0 <= p <= n else 0)
    rows = {o: i for i, o in enumerate(e.orbits_of_dim(n - p))}
    cols = {o: i for i, o in enumerate(e.orbits_of_dim(p))}
    ents: dict[tuple[int, int], dict] = {}
    for o in e.orbits_of_dim(n):
        s = e.orbits[o]
        hf, front = e._split(s[: n - p + 1])
        hb, back = e._split(s[n - p :])
        fo, bo = e.index[front], e.index[back]
        if fo in e.boundary:
            continue
        w = g.mul(g.inv(hf), hb)
        terms = ents.setdefault((rows[fo], cols[bo]), {})
        terms[w] = terms.get(w, 0) + e.orientation[o]
    return GroupRingMatrix(
        g, len(rows), len(cols), {k: x for k, t in ents.items() if not (x := GroupRingElement(g, t)).is_zero()}
    )


def symmetric_structure(e: EquivariantComplex) -> SymmetricComplex:
    """Chain complex of a closed cover with the cap duality ``f_q = s_q cap_{n-q}``.

    The signs follow one of a few alternating rules, normalised to ``+1``
    in the middle degree; the first rule passing the exact chain-map and
    symmetry check is used.
    """
    if e.boundary:
        raise ComplexError("symmetric structure needs a closed cover (empty boundary)")
    c = e.chain_complex()
    n = e.dim
    caps = [cap_operator(e, n - q) for q in range(n + 1)]
    for rule in _SIGN_RULES:
        signs = rule(n)
        duality = [caps[q].scale(signs[q]) for q in range(n + 1)]
        try:
            s = SymmetricComplex(c, tuple(duality))
        except ValueError:
            continue
        if validate(s).ok:
            return s
    raise ComplexError("no sign convention turns the cap product into a chain map")


def _alt(n, step):
    out = [1]
    for q in range(n):
        out.append(out[-1] * step(q))
    mid = out[n // 2]
    return [v * mid for v in out]


_SIGN_RULES = (
    lambda n: _alt(n, lambda q: (-1) ** (q + 1)),
    lambda n: _alt(n, lambda q: (-1) ** q),
    lambda n: _alt(n, lambda q: -1),
    lambda n: _alt(n, lambda q: 1),
)


# ---------------------------------------------------------------------------
# truncation


@dataclass
class TruncatedOperator:
    level: int | None
    matrix: QMatrix
    rows: list[Cell]
    cols: list[Cell]


def truncate(
    a: GroupRingMatrix,
    e: EquivariantComplex,
    row_cells: Sequence[Cell],
    col_cells: Sequence[Cell],
    row_dim: int,
    col_dim: int,
    level: int | None = None,
) -> TruncatedOperator:
    """``P A P*`` on the given coordinates.

    ``a`` acts on orbit coordinates of degree ``col_dim`` into degree
    ``row_dim``; entry ``[(t, x), (r, y)]`` is the coefficient of
    ``x^-1 y`` in ``a[t, r]``.
    """
    g = e.group
    rpos = {o: i for i, o in enumerate(e.orbits_of_dim(row_dim))}
    cpos = {o: i for i, o in enumerate(e.orbits_of_dim(col_dim))}
    corbit = {i: o for o, i in cpos.items()}
    cidx = {c: j for j, c in enumerate(col_cells)}
    by_row: dict[int, list[tuple[int, GroupRingElement]]] = {}
    for (i, j), x in a.entries.items():
        by_row.setdefault(i, []).append((j, x))
    m = QMatrix(len(row_cells), len(col_cells))
    for r, (o, x) in enumerate(row_cells):
        for j, elem in by_row.get(rpos[o], ()):
            co = corbit[j]
            for h, coeff in elem.terms.items():
                col = cidx.get((co, g.mul(x, h)))
                if col is not None:
                    m.add_to(r, col, coeff)
    return TruncatedOperator(level, m, list(row_cells), list(col_cells))


def to_rational(a: GroupRingMatrix) -> QMatrix:
    """A matrix over the trivial group as a rational matrix."""
    if not isinstance(a.group, TrivialGroup):
        raise ValueError("only matrices over the trivial group are rational matrices")
    return QMatrix.from_entries(a.nrows, a.ncols, ((i, j, x.identity_coefficient()) for (i, j), x in a.entries.items()))


# ---------------------------------------------------------------------------
# restriction identity


@dataclass
class RestrictionReport:
    ok: bool
    degrees: dict = field(default_factory=dict)
    structural: list = field(default_factory=list)
    message: str = ""

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "degrees": self.degrees,
            "structural_violations": [[repr(s), repr(f)] for s, f in self.structural],
            "message": self.message,
        }


def _compare(g_u: QMatrix, u_rows, u_cols, big: QMatrix, big_rows, big_cols) -> list:
    ri = {s: i for i, s in enumerate(big_rows)}
    ci = {s: j for j, s in enumerate(big_cols)}
    bad = []
    for i, t in enumerate(u_rows):
        for j, r in enumerate(u_cols):
            if g_u[i, j] != big[ri[t], ci[r]]:
                bad.append((t, r, g_u[i, j], big[ri[t], ci[r]]))
    return bad


def restriction_check(
    k: SimplicialComplex,
    boundary: SimplicialComplex | None,
    u: SimplicialComplex,
    v: SimplicialComplex | None = None,
    orientation: dict | None = None,
) -> RestrictionReport:
    """``g_U = P_U g P_U*`` on rows ``U - V`` and columns ``U``, every degree.

    ``k`` is the ambient oriented homology manifold with boundary
    ``boundary``; ``u`` a subcomplex validated as a homology manifold with
    boundary ``v`` (derived if omitted).  ``U`` inherits its orientation
    from ``k``.
    """
    k.require_subcomplex(u)
    rep = validate_homology_manifold(u, v)
    if v is None:
        v = rep.boundary
    structural = structural_violations(k, u, v)
    if not rep.ok or u.dim != k.dim:
        return RestrictionReport(False, structural=structural, message=f"U fails validation: {rep.violations[:3]}")
    if structural:
        return RestrictionReport(False, structural=structural, message="a top simplex outside U has a face in U - V")
    if orientation is None:
        orientation = orient(k, boundary)
    big = EquivariantComplex.from_finite(k, boundary, orientation)
    n = k.dim
    sub_orient = {s: orientation[s] for s in u.of_dim(n)}
    small = EquivariantComplex.from_finite(u, v, sub_orient)
    out = RestrictionReport(True)
    for p in range(n + 1):
        q = n - p
        gb = to_rational(cap_operator(big, p))
        gs = to_rational(cap_operator(small, p))
        rows_b = [big.orbits[o] for o in big.orbits_of_dim(q)]
        cols_b = [big.orbits[o] for o in big.orbits_of_dim(p)]
        rows_s = [small.orbits[o] for o in small.orbits_of_dim(q)]
        cols_s = [small.orbits[o] for o in small.orbits_of_dim(p)]
        vset = {tuple((x, ()) for x in s) for s in v.simplices}
        keep = [i for i, t in enumerate(rows_s) if t not in vset]
        gs_in = gs.submatrix(keep, list(range(len(cols_s))))
        bad = _compare(gs_in, [rows_s[i] for i in keep], cols_s, gb, rows_b, cols_b)
        # rows in V must vanish on the U side
        stray = [rows_s[i] for i in range(len(rows_s)) if i not in set(keep) and gs.rows.get(i)]
        out.degrees[p] = {"entries": len(keep) * len(cols_s), "mismatches": len(bad) + len(stray)}
        if bad or stray:
            out.ok = False
    return out


def restriction_check_cover(
    e: EquivariantComplex, u: FiniteSubcomplex, v: SimplicialComplex | None = None
) -> RestrictionReport:
    """The restriction identity for a finite submanifold ``U`` of the cover.

    The left side is the cap operator of the realized ``(U, V)``; the right
    side is the truncation of ``cap_operator(e)`` to rows in ``U - V`` and
    columns in ``U``.
    """
    real = u.realize()
    rep = validate_homology_manifold(real, v)
    if v is None:
        v = rep.boundary
    if not rep.ok or real.dim != e.dim:
        return RestrictionReport(False, message=f"U fails validation: {rep.violations[:3]}")
    n = e.dim
    orient_u = u.orientation()
    small = EquivariantComplex.from_finite(real, v, orient_u)
    out = RestrictionReport(True)
    vset = v.simplices

    def unlift(s):
        return tuple(x for x, _ in s)

    for p in range(n + 1):
        q = n - p
        gs = to_rational(cap_operator(small, p))
        rows_s = [small.orbits[o] for o in small.orbits_of_dim(q)]
        cols_s = [small.orbits[o] for o in small.orbits_of_dim(p)]
        keep = [i for i, t in enumerate(rows_s) if unlift(t) not in vset]
        row_cells = [e.cell_of(unlift(rows_s[i])) for i in keep]
        col_cells = [e.cell_of(unlift(t)) for t in cols_s]
        tr = truncate(cap_operator(e, p), e, row_cells, col_cells, q, p).matrix
        gs_in = gs.submatrix(keep, list(range(len(cols_s))))
        mism = sum(1 for i in range(len(keep)) for j in range(len(cols_s)) if gs_in[i, j] != tr[i, j])
        out.degrees[p] = {"entries": len(keep) * len(cols_s), "mismatches": mism}
        if mism:
            out.ok = False
    return out


__all__ = [
    "cap_operator",
    "symmetric_structure",
    "TruncatedOperator",
    "truncate",
    "to_rational",
    "RestrictionReport",
    "restriction_check",
    "restriction_check_cover",
]

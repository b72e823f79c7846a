"""Free simplicial Gamma-complexes given by orbit representatives, finite
subcomplexes of the cover, neighbourhoods ``U_R`` and Folner exhaustions.

A lifted vertex is a pair ``(v, g)`` of a base vertex and a group element;
``gamma`` acts by ``(v, g) -> (v, gamma g)``.  A simplex of the cover is a
tuple of lifted vertices sorted by ``(v, g)``.  This local ordering is
Gamma-invariant when every simplex has distinct base vertices, and for
``Z^m`` (whose lexicographic order is translation invariant) in general.
Each orbit is stored by its canonical representative, the translate whose
first vertex carries the identity; a cell of the cover is ``(orbit, gamma)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from ..groupring import GroupRingElement, GroupRingMatrix
from ..groups import FreeAbelianGroup, Group, GroupError, TrivialGroup
from .simplicial import ComplexError, SimplicialComplex, orient, vkey

Cell = tuple  # (orbit index, group element)


def _lkey(group: Group, lv):
    v, g = lv
    return (vkey(v), group.sort_key(g))


class EquivariantComplex:
    """Cover ``X-bar`` of a finite complex ``X`` with free cocompact Gamma-action."""

    def __init__(
        self,
        group: Group,
        simplices: Iterable[Sequence],
        boundary: Iterable[Sequence] = (),
        orientation: dict | Sequence | None = None,
    ):
        self.group = group
        reps = set()
        for s in simplices:
            rep = self._canon(s)
            for r in range(1, len(rep) + 1):
                for f in itertools.combinations(rep, r):
                    reps.add(self._canon(f))
        self.orbits: list[tuple] = sorted(reps, key=lambda s: (len(s), tuple(_lkey(group, x) for x in s)))
        self.index = {s: i for i, s in enumerate(self.orbits)}
        self.dim = max((len(s) - 1 for s in self.orbits), default=-1)
        self._by_dim: dict[int, list[int]] = {}
        for i, s in enumerate(self.orbits):
            self._by_dim.setdefault(len(s) - 1, []).append(i)
        # faces[i] = list of (face orbit, h) with face_j(rep_i) = h * rep_face
        self.faces: list[list[tuple[int, object]]] = []
        for s in self.orbits:
            fl = []
            if len(s) > 1:
                for j in range(len(s)):
                    f = s[:j] + s[j + 1 :]
                    h, frep = self._split(f)
                    fl.append((self.index[frep], h))
            self.faces.append(fl)
        bd = set()
        for s in boundary:
            rep = self._canon(s)
            for r in range(1, len(rep) + 1):
                for f in itertools.combinations(rep, r):
                    bd.add(self.index[self._canon(f)])
        self.boundary = frozenset(bd)
        self.orientation = self._orientation(orientation)

    # -- canonical forms

    def _sorted(self, s) -> tuple:
        g = self.group
        lvs = tuple((v, g.coerce(x) if not g.contains(x) else x) for v, x in s)
        out = tuple(sorted(set(lvs), key=lambda lv: _lkey(g, lv)))
        if len(out) != len(lvs):
            raise ComplexError(f"repeated vertex in {s}")
        return out

    def _split(self, s) -> tuple[object, tuple]:
        """``s = h * rep`` with ``rep`` canonical."""
        g = self.group
        s = self._sorted(s)
        h = s[0][1]
        hi = g.inv(h)
        rep = tuple((v, g.mul(hi, x)) for v, x in s)
        if self._sorted(rep) != rep:
            raise ComplexError(f"local ordering is not invariant on {s}")
        return h, rep

    def _canon(self, s) -> tuple:
        return self._split(s)[1]

    def translate(self, gamma, s: tuple) -> tuple:
        g = self.group
        return tuple((v, g.mul(gamma, x)) for v, x in s)

    def vertices_of(self, cell: Cell) -> tuple:
        o, gamma = cell
        return self.translate(gamma, self.orbits[o])

    def cell_of(self, s) -> Cell:
        h, rep = self._split(s)
        if rep not in self.index:
            raise ComplexError(f"{s} is not a simplex of the cover")
        return (self.index[rep], h)

    # -- structure

    def orbits_of_dim(self, p: int) -> list[int]:
        return self._by_dim.get(p, [])

    def rank(self, p: int) -> int:
        return len(self.orbits_of_dim(p))

    @property
    def size(self) -> int:
        """``|X|``: number of simplices of the base, i.e. of orbits."""
        return len(self.orbits)

    def cell_faces(self, cell: Cell) -> list[Cell]:
        o, gamma = cell
        return [(f, self.group.mul(gamma, h)) for f, h in self.faces[o]]

    def boundary_matrix(self, p: int) -> GroupRingMatrix:
        """``c_p`` as an ``r_{p-1} x r_p`` matrix over the group ring."""
        g = self.group
        rows = {o: i for i, o in enumerate(self.orbits_of_dim(p - 1))}
        cols = self.orbits_of_dim(p)
        ents: dict[tuple[int, int], dict] = {}
        if p >= 1:
            for j, o in enumerate(cols):
                for i, (f, h) in enumerate(self.faces[o]):
                    terms = ents.setdefault((rows[f], j), {})
                    hi = g.inv(h)
                    terms[hi] = terms.get(hi, 0) + (-1) ** i
        return GroupRingMatrix(
            g,
            len(rows),
            len(cols),
            {k: x for k, t in ents.items() if not (x := GroupRingElement(g, t)).is_zero()},
        )

    def chain_complex(self):
        from ..chain import FreeComplex

        n = max(self.dim, 0)
        return FreeComplex.build(self.group, [self.rank(p) for p in range(n + 1)], [self.boundary_matrix(p) for p in range(1, n + 1)])

    def _orientation(self, given) -> dict[int, int]:
        n = self.dim
        tops = self.orbits_of_dim(n)
        if given is None:
            signs = self._auto_orientation()
        elif isinstance(given, dict):
            signs = {self.index[self._canon(k)] if not isinstance(k, int) else k: int(v) for k, v in given.items()}
        else:
            if len(given) != len(tops):
                raise ComplexError("orientation needs one sign per top-dimensional orbit")
            signs = {o: int(s) for o, s in zip(tops, given)}
        if sorted(signs) != sorted(tops) or any(s not in (1, -1) for s in signs.values()):
            raise ComplexError("orientation must give a sign +-1 to every top-dimensional orbit")
        acc: dict[int, int] = {}
        for o in tops:
            for i, (f, _) in enumerate(self.faces[o]):
                if f not in self.boundary:
                    acc[f] = acc.get(f, 0) + signs[o] * (-1) ** i
        bad = [self.orbits[f] for f, v in acc.items() if v]
        if bad:
            raise ComplexError(f"orientation is not a relative cycle: boundary on {bad[:3]}")
        return signs

    def _auto_orientation(self) -> dict[int, int]:
        n = self.dim
        tops = self.orbits_of_dim(n)
        if n <= 0:
            return {o: 1 for o in tops}
        # adjacency across non-boundary codimension-one orbits
        cof: dict[int, list[tuple[int, int]]] = {}
        for o in tops:
            for i, (f, _) in enumerate(self.faces[o]):
                cof.setdefault(f, []).append((o, i))
        signs: dict[int, int] = {}
        for start in tops:
            if start in signs:
                continue
            signs[start] = 1
            stack = [start]
            while stack:
                o = stack.pop()
                for i, (f, _) in enumerate(self.faces[o]):
                    if f in self.boundary:
                        continue
                    nb = cof[f]
                    if len(nb) != 2:
                        raise ComplexError(f"orbit {self.orbits[f]} has {len(nb)} cofaces; not a pseudomanifold")
                    (a, ia), (b, ib) = nb
                    other, io = (b, ib) if (a, ia) == (o, i) else (a, ia)
                    want = -signs[o] * (-1) ** i * (-1) ** io
                    if other in signs:
                        if signs[other] != want:
                            raise ComplexError("cover is not orientably Gamma-invariant")
                    else:
                        signs[other] = want
                        stack.append(other)
        return signs

    def check_equivariance(self, elements: Iterable | None = None) -> list[str]:
        """Face maps commute with translation: ``faces(g c) = g faces(c)``."""
        g = self.group
        elements = list(elements) if elements is not None else list(g.generators) + [g.identity]
        bad = []
        for o in range(len(self.orbits)):
            for gamma in elements:
                c = (o, gamma)
                direct = sorted(self.cell_of(f_vs) for f_vs in _faces_vs(self.vertices_of(c)))
                mapped = sorted(self.cell_faces(c))
                if sorted(map(repr, direct)) != sorted(map(repr, mapped)):
                    bad.append(f"orbit {o} under {gamma!r}")
        return bad

    def fundamental_domain(self) -> list[Cell]:
        e = self.group.identity
        return [(o, e) for o in range(len(self.orbits))]

    # -- serialization

    def to_json(self) -> dict:
        g = self.group
        enc = lambda s: [[v, g.to_json(x)] for v, x in s]
        tops = self.orbits_of_dim(self.dim)
        return {
            "group": g.descriptor(),
            "simplices": [enc(self.orbits[o]) for o in tops],
            "boundary": [enc(self.orbits[o]) for o in sorted(self.boundary)],
            "orientation": [self.orientation[o] for o in tops],
        }

    @classmethod
    def from_json(cls, d: dict) -> EquivariantComplex:
        from ..groups import group_from_json

        g = group_from_json(d.get("group", {"kind": "trivial"}))
        dec = lambda s: [(v if not isinstance(v, list) else tuple(v), g.coerce(x)) for v, x in s]
        sims = [dec(s) for s in d["simplices"]]
        bd = [dec(s) for s in d.get("boundary", [])]
        return cls(g, sims, bd, d.get("orientation"))

    @classmethod
    def from_finite(
        cls, k: SimplicialComplex, boundary: SimplicialComplex | None = None, orientation: dict | None = None
    ) -> EquivariantComplex:
        """A finite complex as a cover with trivial group."""
        from .simplicial import validate_homology_manifold

        g = TrivialGroup()
        lift = lambda s: [(v, ()) for v in s]
        if boundary is None and orientation is None:
            rep = validate_homology_manifold(k)
            if rep.ok:
                boundary = rep.boundary
        bd = boundary.simplices if boundary is not None else ()
        if orientation is None:
            orientation = orient(k, boundary)
        return cls(g, [lift(s) for s in k], [lift(s) for s in bd], {tuple(lift(s)): e for s, e in orientation.items()})

    def finite_index(self, s) -> int:
        """Orbit index of a simplex of a complex made by ``from_finite``."""
        return self.index[tuple((v, ()) for v in s)]

    def __repr__(self):
        return f"EquivariantComplex({self.group!r}, orbits per dim {[self.rank(p) for p in range(self.dim + 1)]})"


def _faces_vs(vs: tuple) -> list[tuple]:
    if len(vs) == 1:
        return []
    return [vs[:j] + vs[j + 1 :] for j in range(len(vs))]


# ---------------------------------------------------------------------------
# finite subcomplexes of the cover


class FiniteSubcomplex:
    """Finite face-closed set of cells ``(orbit, gamma)``."""

    def __init__(self, cover: EquivariantComplex, cells: Iterable[Cell], closed: bool = False):
        self.cover = cover
        cells = set(cells)
        if not closed:
            stack = list(cells)
            while stack:
                c = stack.pop()
                for f in cover.cell_faces(c):
                    if f not in cells:
                        cells.add(f)
                        stack.append(f)
        self.cells = frozenset(cells)

    def __len__(self):
        return len(self.cells)

    def __contains__(self, c) -> bool:
        return c in self.cells

    def __eq__(self, other):
        return isinstance(other, FiniteSubcomplex) and self.cells == other.cells

    def __hash__(self):
        return hash(self.cells)

    def __le__(self, other) -> bool:
        return self.cells <= other.cells

    def __repr__(self):
        return f"FiniteSubcomplex({len(self.cells)} cells)"

    def sorted_cells(self, p: int | None = None) -> list[Cell]:
        e = self.cover
        g = e.group
        cs = self.cells if p is None else [c for c in self.cells if len(e.orbits[c[0]]) - 1 == p]
        return sorted(cs, key=lambda c: (len(e.orbits[c[0]]), c[0], g.sort_key(c[1])))

    def count_by_orbit(self) -> dict[int, int]:
        out = {o: 0 for o in range(len(self.cover.orbits))}
        for o, _ in self.cells:
            out[o] += 1
        return out

    def lifted_vertices(self) -> set:
        return {lv for c in self.cells for lv in self.cover.vertices_of(c)}

    def translate(self, gamma) -> FiniteSubcomplex:
        g = self.cover.group
        return FiniteSubcomplex(self.cover, ((o, g.mul(gamma, x)) for o, x in self.cells), closed=True)

    def is_closed(self) -> bool:
        return all(f in self.cells for c in self.cells for f in self.cover.cell_faces(c))

    def realize(self) -> SimplicialComplex:
        """The subcomplex as a finite simplicial complex on lifted vertices."""
        return SimplicialComplex((self.cover.vertices_of(c) for c in self.cells), closed=True)

    def cells_of(self, k: SimplicialComplex) -> list[Cell]:
        return [self.cover.cell_of(s) for s in k]

    def orientation(self) -> dict[tuple, int]:
        e = self.cover
        n = e.dim
        return {e.vertices_of(c): e.orientation[c[0]] for c in self.cells if len(e.orbits[c[0]]) - 1 == n}

    def boundary_part(self) -> SimplicialComplex:
        """Cells lying in the lift of the base boundary ``L``."""
        e = self.cover
        return SimplicialComplex((e.vertices_of(c) for c in self.cells if c[0] in e.boundary), closed=True)


def u_r(z: FiniteSubcomplex, radius: int) -> FiniteSubcomplex:
    """Face closure of ``{gamma s : |gamma_1^{-1} gamma| < R, gamma_1 s meets Z}``."""
    e = z.cover
    g = e.group
    if radius <= 0:
        return FiniteSubcomplex(e, ())
    ball = g.ball(radius - 1)
    zv: dict[object, list] = {}
    for v, x in z.lifted_vertices():
        zv.setdefault(v, []).append(x)
    cells = set()
    for o, rep in enumerate(e.orbits):
        for v, gi in rep:
            gi_inv = g.inv(gi)
            for x in zv.get(v, ()):
                g1 = g.mul(x, gi_inv)
                for s in ball:
                    cells.add((o, g.mul(g1, s)))
    return FiniteSubcomplex(e, cells)


def folner_exhaustion(cover: EquivariantComplex, sets: Sequence[Iterable]) -> list[FiniteSubcomplex]:
    """``X'_k`` = face closure of ``V_k F``."""
    out = []
    prev: set | None = None
    for vk in sets:
        vk = {cover.group.check(x) for x in vk}
        if prev is not None and not prev <= vk:
            raise ValueError("Folner sets must be nested")
        prev = vk
        out.append(FiniteSubcomplex(cover, ((o, x) for x in vk for o in range(len(cover.orbits)))))
    return out


def box(group: Group, k: int) -> list:
    """``{-k..k}^m`` in ``Z^m``; the whole group when it is finite."""
    if isinstance(group, FreeAbelianGroup):
        return list(itertools.product(range(-k, k + 1), repeat=group.rank))
    if group.is_finite:
        return group.ball(10**9)
    raise GroupError(f"no box Folner sets for {group!r}")


def box_exhaustion(cover: EquivariantComplex, ks: Sequence[int]) -> list[FiniteSubcomplex]:
    return folner_exhaustion(cover, [box(cover.group, k) for k in ks])


@dataclass
class ExhaustionReport:
    ok: bool
    ratios: dict
    message: str = ""

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "ratios": {str(k): [str(r) for r in v] for k, v in self.ratios.items()},
            "message": self.message,
        }


def is_amenable_exhaustion(
    seq: Sequence[FiniteSubcomplex], radii: Sequence[int] = (1,), tol=Fraction(1, 10)
) -> ExhaustionReport:
    """``|U_R(X_k)| / |X_k|`` per ``R``; passes when the last ratio is within ``tol`` of 1."""
    for a, b in zip(seq, seq[1:]):
        if not a <= b:
            raise ValueError("exhaustion is not nested")
    ratios = {}
    ok = True
    for r in radii:
        vals = [Fraction(len(u_r(x, r)), len(x)) for x in seq]
        ratios[r] = vals
        if not vals or abs(vals[-1] - 1) > tol:
            ok = False
    return ExhaustionReport(ok, ratios)


def is_balanced(seq: Sequence[FiniteSubcomplex], tol=Fraction(1, 10)) -> ExhaustionReport:
    """Per-orbit share ``|X_k cap Gamma s| / |X_k|`` against ``1/|X|``."""
    if not seq:
        return ExhaustionReport(False, {}, "empty sequence")
    e = seq[0].cover
    target = Fraction(1, e.size)
    ratios = {o: [] for o in range(e.size)}
    for x in seq:
        counts = x.count_by_orbit()
        for o in ratios:
            ratios[o].append(Fraction(counts[o], len(x)))
    ok = all(abs(v[-1] - target) <= tol * target for v in ratios.values())
    return ExhaustionReport(ok, ratios, f"target 1/{e.size}")


# ---------------------------------------------------------------------------
# shipped covers


def line_cover(vertices: int = 1) -> EquivariantComplex:
    """``R`` over a circle with ``vertices`` vertices, as a Z-cover."""
    z = FreeAbelianGroup(1)
    n = vertices
    sims = [[(i, (0,)), (i + 1, (0,))] for i in range(n - 1)] + [[(n - 1, (0,)), (0, (1,))]]
    return EquivariantComplex(z, sims)


def plane_cover() -> EquivariantComplex:
    """``R^2`` over the one-vertex torus, as a Z^2-cover."""
    z2 = FreeAbelianGroup(2)
    sims = [
        [(0, (0, 0)), (0, (1, 0)), (0, (1, 1))],
        [(0, (0, 0)), (0, (0, 1)), (0, (1, 1))],
    ]
    return EquivariantComplex(z2, sims)


def points_cover(group: Group, signs: Sequence[int]) -> EquivariantComplex:
    """Zero-dimensional cover: ``len(signs)`` free orbits of oriented points."""
    e = group.identity
    return EquivariantComplex(group, [[(i, e)] for i in range(len(signs))], orientation=list(signs))


__all__ = [
    "EquivariantComplex",
    "FiniteSubcomplex",
    "ExhaustionReport",
    "u_r",
    "folner_exhaustion",
    "box",
    "box_exhaustion",
    "is_amenable_exhaustion",
    "is_balanced",
    "line_cover",
    "plane_cover",
    "points_cover",
]

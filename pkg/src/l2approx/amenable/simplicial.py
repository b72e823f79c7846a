"""Finite simplicial complexes: stars, links, barycentric subdivision,
rational homology, homology-manifold validation, orientation and the
regular-neighbourhood thickening."""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Iterable

from ..linalg import QMatrix, rank

Vertex = Hashable
Simplex = tuple


def vkey(v):
    """Total order on vertices: ints, then tuples (by length, then entries)."""
    if isinstance(v, tuple):
        return (1, len(v), tuple(vkey(x) for x in v))
    return (0, v)


def simplex(vs: Iterable[Vertex]) -> Simplex:
    vs = tuple(sorted(set(vs), key=vkey))
    return vs


def faces_of(s: Simplex) -> list[Simplex]:
    """All non-empty faces, including ``s``."""
    return [c for r in range(1, len(s) + 1) for c in itertools.combinations(s, r)]


class ComplexError(ValueError):
    pass


class SimplicialComplex:
    """Face-closed set of simplices, each a ``vkey``-sorted vertex tuple."""

    __slots__ = ("simplices", "_by_dim")

    def __init__(self, simplices: Iterable[Iterable[Vertex]] = (), closed: bool = False):
        ss = {simplex(s) for s in simplices}
        ss.discard(())
        if not closed:
            ss = {f for s in ss for f in faces_of(s)}
        self.simplices = frozenset(ss)
        by: dict[int, list] = {}
        for s in self.simplices:
            by.setdefault(len(s) - 1, []).append(s)
        self._by_dim = {d: sorted(v, key=vkey) for d, v in by.items()}

    @classmethod
    def from_facets(cls, facets: Iterable[Iterable[Vertex]]) -> SimplicialComplex:
        return cls(facets)

    @property
    def dim(self) -> int:
        return max(self._by_dim, default=-1)

    def __len__(self):
        return len(self.simplices)

    def __contains__(self, s) -> bool:
        return simplex(s) in self.simplices

    def __iter__(self):
        for d in sorted(self._by_dim):
            yield from self._by_dim[d]

    def __eq__(self, other):
        return isinstance(other, SimplicialComplex) and self.simplices == other.simplices

    def __hash__(self):
        return hash(self.simplices)

    def __le__(self, other: SimplicialComplex) -> bool:
        return self.simplices <= other.simplices

    def __repr__(self):
        counts = [len(self.of_dim(d)) for d in range(self.dim + 1)]
        return f"SimplicialComplex(f-vector={counts})"

    def of_dim(self, d: int) -> list[Simplex]:
        return self._by_dim.get(d, [])

    @property
    def vertices(self) -> list[Vertex]:
        return [s[0] for s in self.of_dim(0)]

    def facets(self) -> list[Simplex]:
        cofaced = set()
        for s in self.simplices:
            for i in range(len(s)):
                cofaced.add(s[:i] + s[i + 1 :])
        return sorted((s for s in self.simplices if s not in cofaced), key=lambda s: (len(s), vkey(s)))

    def is_pure(self) -> bool:
        return all(len(f) - 1 == self.dim for f in self.facets())

    def union(self, other: SimplicialComplex) -> SimplicialComplex:
        return SimplicialComplex(self.simplices | other.simplices, closed=True)

    def full_subcomplex(self, verts: Iterable[Vertex]) -> SimplicialComplex:
        vs = set(verts)
        return SimplicialComplex((s for s in self.simplices if set(s) <= vs), closed=True)

    def require_subcomplex(self, x: SimplicialComplex) -> None:
        if not x.simplices <= self.simplices:
            extra = sorted(x.simplices - self.simplices, key=vkey)[:3]
            raise ComplexError(f"not a subcomplex: {extra} missing")

    def link(self, s: Iterable[Vertex]) -> SimplicialComplex:
        s = simplex(s)
        ss = set(s)
        out = []
        for t in self.simplices:
            if ss <= set(t) and len(t) > len(s):
                out.append(tuple(v for v in t if v not in ss))
        return SimplicialComplex(out, closed=True)

    def star(self, x: SimplicialComplex | Iterable) -> SimplicialComplex:
        """Union of the closed stars of all vertices of ``x``."""
        if not isinstance(x, SimplicialComplex):
            x = SimplicialComplex(x)
        self.require_subcomplex(x)
        vs = set(x.vertices)
        return SimplicialComplex((s for s in self.simplices if vs & set(s)))

    def barycentric(self) -> SimplicialComplex:
        """Vertices are the simplices of ``self``; simplices are flags."""
        out = []
        by_len = sorted(self.simplices, key=len)
        # extend flags upward one step at a time
        up: dict[Simplex, list[Simplex]] = {s: [] for s in self.simplices}
        for t in by_len:
            for i in range(len(t)):
                f = t[:i] + t[i + 1 :]
                if f:
                    up[f].append(t)

        def extend(flag):
            out.append(flag)
            last = flag[-1]
            stack = list(up[last])
            seen = set()
            while stack:
                t = stack.pop()
                if t in seen:
                    continue
                seen.add(t)
                extend(flag + (t,))
                stack.extend(up[t])

        for s in by_len:
            extend((s,))
        return SimplicialComplex(out, closed=True)

    def subdivide(self, x: SimplicialComplex) -> SimplicialComplex:
        """``x_b``: the subdivision of a subcomplex, inside ``self.barycentric()``."""
        self.require_subcomplex(x)
        return x.barycentric()

    # -- homology

    def boundary_matrix(self, p: int, rel: SimplicialComplex | None = None) -> QMatrix:
        """``d_p`` as a matrix ``C_{p-1} x C_p`` (relative to ``rel`` if given)."""
        rows = [s for s in self.of_dim(p - 1) if rel is None or s not in rel.simplices]
        cols = [s for s in self.of_dim(p) if rel is None or s not in rel.simplices]
        ri = {s: i for i, s in enumerate(rows)}
        m = QMatrix(len(rows), len(cols))
        for j, s in enumerate(cols):
            for i in range(len(s)):
                f = s[:i] + s[i + 1 :]
                if f in ri:
                    m.add_to(ri[f], j, -1 if i % 2 else 1)
        return m

    def reduced_betti(self) -> dict[int, int]:
        """Rational reduced Betti numbers; the empty complex has ``H~_{-1} = Q``."""
        if not self.simplices:
            return {-1: 1}
        n = self.dim
        ranks = {}
        for p in range(1, n + 1):
            ranks[p] = rank(self.boundary_matrix(p))
        out = {}
        for p in range(0, n + 1):
            cp = len(self.of_dim(p))
            rk_out = ranks.get(p, 0) if p >= 1 else (1 if cp else 0)  # augmentation
            rk_in = ranks.get(p + 1, 0)
            b = cp - rk_out - rk_in
            if b:
                out[p] = b
        return out

    def to_json(self) -> dict:
        return {"facets": [list(f) for f in self.facets()]}


def is_sphere_homology(betti: dict[int, int], m: int) -> bool:
    return betti == {m: 1}


def is_acyclic(betti: dict[int, int]) -> bool:
    return not betti


@dataclass
class ManifoldReport:
    ok: bool
    dim: int
    interior: list = field(default_factory=list)
    boundary: SimplicialComplex | None = None
    violations: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "dim": self.dim,
            "interior_count": len(self.interior),
            "boundary_count": len(self.boundary) if self.boundary is not None else 0,
            "violations": [[list(s), why] for s, why in self.violations],
        }


def validate_homology_manifold(k: SimplicialComplex, boundary: SimplicialComplex | None = None) -> ManifoldReport:
    """Classify every simplex by the rational homology of its link.

    Interior: link has the homology of ``S^(n-1-dim)``.  Boundary: link is
    acyclic.  If ``boundary`` is given it must equal the derived boundary.
    """
    n = k.dim
    rep = ManifoldReport(True, n)
    if not k.simplices:
        rep.boundary = SimplicialComplex()
        if boundary is not None and boundary.simplices:
            rep.ok = False
            rep.violations.append(((), "declared boundary in an empty complex"))
        return rep
    if not k.is_pure():
        rep.ok = False
        for f in k.facets():
            if len(f) - 1 != n:
                rep.violations.append((f, f"maximal simplex of dimension {len(f) - 1} < {n}"))
    bd = []
    for s in k:
        b = k.link(s).reduced_betti()
        m = n - 1 - (len(s) - 1)
        if is_sphere_homology(b, m):
            rep.interior.append(s)
        elif is_acyclic(b):
            bd.append(s)
        else:
            rep.ok = False
            rep.violations.append((s, f"link homology {b} is neither S^{m} nor acyclic"))
    rep.boundary = SimplicialComplex(bd, closed=True)
    if len(SimplicialComplex(bd)) != len(rep.boundary):
        rep.ok = False
        rep.violations.append(((), "boundary simplices do not form a subcomplex"))
    if boundary is not None and boundary.simplices != rep.boundary.simplices:
        rep.ok = False
        diff = sorted(boundary.simplices ^ rep.boundary.simplices, key=vkey)[:5]
        rep.violations.append(((), f"declared boundary differs from derived boundary at {diff}"))
    return rep


def orient(k: SimplicialComplex, boundary: SimplicialComplex | None = None) -> dict[Simplex, int]:
    """Signs on top simplices making their sum a relative cycle mod ``boundary``.

    Each connected piece gets ``+1`` on its smallest simplex.  Raises if the
    complex is not orientable (or not a pseudomanifold).
    """
    n = k.dim
    bd = boundary.simplices if boundary is not None else frozenset()
    tops = k.of_dim(n)
    cof: dict[Simplex, list[tuple[Simplex, int]]] = {}
    for s in tops:
        for i in range(len(s)):
            f = s[:i] + s[i + 1 :]
            cof.setdefault(f, []).append((s, i))
    signs: dict[Simplex, int] = {}
    for start in tops:
        if start in signs:
            continue
        signs[start] = 1
        queue = deque([start])
        while queue:
            s = queue.popleft()
            for i in range(len(s)):
                f = s[:i] + s[i + 1 :]
                if not f or f in bd:
                    continue
                nbrs = cof[f]
                if len(nbrs) != 2:
                    raise ComplexError(f"face {f} has {len(nbrs)} cofaces; not a pseudomanifold")
                (a, ia), (b, ib) = nbrs
                other, io = (b, ib) if a == s else (a, ia)
                # boundary coefficients on f must cancel
                want = -signs[s] * (-1) ** i * (-1) ** io
                if other in signs:
                    if signs[other] != want:
                        raise ComplexError("complex is not orientable")
                else:
                    signs[other] = want
                    queue.append(other)
    return signs


def check_fundamental_class(
    k: SimplicialComplex, boundary: SimplicialComplex | None, signs: dict[Simplex, int]
) -> list[Simplex]:
    """Codimension-one simplices outside ``boundary`` where the signed sum has boundary."""
    n = k.dim
    bd = boundary.simplices if boundary is not None else frozenset()
    if set(signs) != set(k.of_dim(n)) or any(v not in (1, -1) for v in signs.values()):
        return [()]
    acc: dict[Simplex, int] = {}
    for s, e in signs.items():
        for i in range(len(s)):
            f = s[:i] + s[i + 1 :]
            if f and f not in bd:
                acc[f] = acc.get(f, 0) + e * (-1) ** i
    return sorted((f for f, v in acc.items() if v), key=vkey)


@dataclass
class Thickening:
    x: SimplicialComplex
    y: SimplicialComplex
    report: ManifoldReport


def thicken(
    k: SimplicialComplex, xp: SimplicialComplex, boundary: SimplicialComplex | None = None, check: bool = True
) -> Thickening:
    """Regular neighbourhood of ``xp`` in ``k.barycentric()``.

    ``X`` is the full subcomplex spanned by barycentres of simplices of
    ``k`` meeting ``xp``; this is the level set ``f >= 1/2`` of the
    simplexwise-affine ``f`` that is 1 on ``xp`` and 0 on vertices outside
    it.  ``Y`` is the derived boundary of ``X``.
    """
    k.require_subcomplex(xp)
    if check:
        rep = validate_homology_manifold(k, boundary)
        if not rep.ok:
            raise ComplexError(f"input is not a homology manifold: {rep.violations[:3]}")
    vs = set(xp.vertices)
    keep = [s for s in k.simplices if vs & set(s)]
    sd = k.barycentric()
    x = sd.full_subcomplex(keep)
    rep = validate_homology_manifold(x)
    return Thickening(x, rep.boundary, rep)


def structural_violations(
    k: SimplicialComplex, u: SimplicialComplex, v: SimplicialComplex
) -> list[tuple[Simplex, Simplex]]:
    """Top simplices of ``k`` outside ``u`` having a face in ``u - v``."""
    inner = u.simplices - v.simplices
    out = []
    for s in k.of_dim(k.dim):
        if s in u.simplices:
            continue
        for f in faces_of(s):
            if f in inner:
                out.append((s, f))
                break
    return out


# ---------------------------------------------------------------------------
# shipped examples


def boundary_of_simplex(n: int) -> SimplicialComplex:
    """``S^(n-1)`` as the boundary of the ``n``-simplex."""
    return SimplicialComplex(itertools.combinations(range(n + 1), n))


def cycle_graph(m: int) -> SimplicialComplex:
    if m < 3:
        raise ComplexError("a simplicial circle needs at least 3 vertices")
    return SimplicialComplex((i, (i + 1) % m) for i in range(m))


def torus7() -> SimplicialComplex:
    """The 7-vertex torus."""
    tris = []
    for i in range(7):
        tris.append((i, (i + 1) % 7, (i + 3) % 7))
        tris.append((i, (i + 2) % 7, (i + 3) % 7))
    return SimplicialComplex(tris)


def single_simplex(n: int) -> SimplicialComplex:
    return SimplicialComplex([tuple(range(n + 1))])


def segment(m: int) -> SimplicialComplex:
    return SimplicialComplex((i, i + 1) for i in range(m))


__all__ = [
    "ComplexError",
    "SimplicialComplex",
    "ManifoldReport",
    "Thickening",
    "vkey",
    "simplex",
    "faces_of",
    "validate_homology_manifold",
    "orient",
    "check_fundamental_class",
    "thicken",
    "structural_violations",
    "boundary_of_simplex",
    "cycle_graph",
    "torus7",
    "single_simplex",
    "segment",
]

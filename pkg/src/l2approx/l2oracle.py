"""Independent reference values for von Neumann traces, L2-Betti numbers and
L2-signatures.

Exact oracles (identity coefficients, finite groups) stay in rational
arithmetic.  For ``Z^m`` the limit is computed by Fourier sampling over the
character torus in floating point; this is the only place in the package
where floats enter a computed invariant, and every such value carries a
refinement-derived bound.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import numpy as np

from .chain import FreeComplex, SymmetricComplex, validate
from .groupring import GroupRingElement, GroupRingMatrix
from .groups import FreeAbelianGroup, GroupError, make_tower
from .linalg import QMatrix, format_rational

log = logging.getLogger(__name__)

METHODS = ("identity_coefficient", "finite_group_closed_form", "torus_sampling")


class OracleError(RuntimeError):
    """The oracle could not produce a value within its limits."""


@dataclass(frozen=True)
class OracleResult:
    value: Rational | float
    method: str
    tolerance: float = 0.0
    details: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown oracle method {self.method!r}")
        if self.method != "torus_sampling" and self.tolerance != 0:
            raise ValueError("exact oracle methods carry tolerance 0")

    @property
    def exact(self) -> bool:
        return self.method != "torus_sampling"

    @property
    def value_float(self) -> float:
        return float(self.value)

    def to_json(self) -> dict:
        out = {
            "value": format_rational(self.value) if self.exact else self.value_float,
            "value_decimal": self.value_float,
            "method": self.method,
            "tolerance": self.tolerance,
        }
        out.update(self.details)
        return out

    def __str__(self):
        if self.exact:
            return format_rational(self.value)
        return f"{self.value_float:.6g}±{self.tolerance:.2g}"


# ---------------------------------------------------------------------------
# finite groups


def l2_signature_finite(s: SymmetricComplex) -> Fraction:
    """Ordinary signature of the complex pushed to all of ``Gamma``, over ``|Gamma|``."""
    from .quotient import snapshot

    if not s.group.is_finite:
        raise GroupError("l2_signature_finite needs a finite or trivial group")
    level = make_tower(s.group).level(1)
    snap = snapshot(s, level)
    return Fraction(snap.signature, level.order)


def l2_betti_finite(c: FreeComplex, p: int) -> Fraction:
    from .quotient import betti_k

    if not c.group.is_finite:
        raise GroupError("l2_betti_finite needs a finite or trivial group")
    return betti_k(c, p, make_tower(c.group).level(1))


# ---------------------------------------------------------------------------
# torus sampling


def _grid(rank: int, n: int) -> np.ndarray:
    """Offset grid ``2 pi (j + 1/2) / n`` in each coordinate, shape ``(n**rank, rank)``."""
    ticks = 2 * np.pi * (np.arange(n) + 0.5) / n
    mesh = np.meshgrid(*([ticks] * rank), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _fibers(a: GroupRingMatrix, thetas: np.ndarray) -> np.ndarray:
    """``a`` evaluated at every character: shape ``(len(thetas), rows, cols)``."""
    out = np.zeros((len(thetas), a.nrows, a.ncols), dtype=complex)
    for (i, j), x in a.entries.items():
        for w, c in x.terms.items():
            out[:, i, j] += float(c) * np.exp(1j * (thetas @ np.asarray(w, dtype=float)))
    return out


def _require_torus(group) -> None:
    if not isinstance(group, FreeAbelianGroup):
        raise GroupError("torus oracle needs a free abelian group")


def _ctrans(x: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(x, -1, -2))


def _fiber_laplacian(c: FreeComplex, p: int, thetas: np.ndarray) -> np.ndarray:
    r = c.rank(p)
    lap = np.zeros((len(thetas), r, r), dtype=complex)
    if p + 1 <= c.dim:
        up = _fibers(c.d(p + 1), thetas)
        lap += up @ _ctrans(up)
    if p >= 1:
        down = _fibers(c.d(p), thetas)
        lap += _ctrans(down) @ down
    return lap


def _kernel_tol(mats: np.ndarray) -> float:
    scale = max(1.0, float(np.max(np.abs(mats))) if mats.size else 1.0)
    return 1e-9 * scale * max(1, mats.shape[-1])


def _betti_value(c: FreeComplex, p: int, n: int) -> float:
    thetas = _grid(c.group.rank, n)
    r = c.rank(p)
    if r == 0:
        return 0.0
    lap = _fiber_laplacian(c, p, thetas)
    ev = np.linalg.eigvalsh(lap)
    null = np.sum(ev < _kernel_tol(lap), axis=-1)
    return float(np.sum(null)) / len(thetas)


def _signature_value(s: SymmetricComplex, n: int) -> float:
    c = s.base
    mid = s.middle
    thetas = _grid(s.group.rank, n)
    r = c.rank(mid)
    if r == 0:
        return 0.0
    lap = _fiber_laplacian(c, mid, thetas)
    f = _fibers(s.f(mid), thetas)
    ev, vec = np.linalg.eigh(lap)
    tol = _kernel_tol(lap)
    total = 0
    for t in range(len(thetas)):
        basis = vec[t][:, ev[t] < tol]
        if basis.shape[1] == 0:
            continue
        pairing = _ctrans(basis) @ f[t] @ basis
        pairing = (pairing + _ctrans(pairing)) / 2
        pe = np.linalg.eigvalsh(pairing)
        ptol = 1e-9 * max(1.0, float(np.max(np.abs(pe))))
        total += int(np.sum(pe > ptol)) - int(np.sum(pe < -ptol))
    return total / len(thetas)


def _refine(fn, rank: int, tol: float, start: int | None, limit: int | None, what: str) -> OracleResult:
    n = start or (64 if rank == 1 else 16 if rank == 2 else 8)
    cap = limit or (1 << 16 if rank == 1 else 512 if rank == 2 else 48)
    prev = fn(n)
    history = [(n, prev)]
    while True:
        n2 = 2 * n
        if n2 > cap:
            raise OracleError(
                f"{what}: torus sampling did not settle to {tol} by N={n} (history {history})"
            )
        cur = fn(n2)
        history.append((n2, cur))
        diff = abs(cur - prev)
        if diff < tol:
            return OracleResult(
                cur, "torus_sampling", float(diff), {"grid": n2, "rank": rank, "refinements": len(history)}
            )
        n, prev = n2, cur


def l2_signature_torus(
    s: SymmetricComplex, tol: float = 1e-3, n: int | None = None, limit: int | None = None
) -> OracleResult:
    """Average of fiberwise middle-pairing signatures over the character torus.

    Refinement doubles the grid size until two successive averages differ
    by less than ``tol``; that last difference is the reported bound.
    """
    _require_torus(s.group)
    rep = validate(s)
    if not rep.ok:
        raise OracleError(f"invalid symmetric complex: {rep.violations}")
    return _refine(lambda k: _signature_value(s, k), s.group.rank, tol, n, limit, "signature")


def l2_betti_torus(
    c: FreeComplex | SymmetricComplex, p: int, tol: float = 1e-3, n: int | None = None, limit: int | None = None
) -> OracleResult:
    """Average fiberwise nullity of ``Delta_p``."""
    if isinstance(c, SymmetricComplex):
        c = c.base
    _require_torus(c.group)
    if not 0 <= p <= c.dim:
        raise ValueError(f"degree {p} out of range 0..{c.dim}")
    return _refine(lambda k: _betti_value(c, p, k), c.group.rank, tol, n, limit, f"betti_{p}")


def signature_oracle(s: SymmetricComplex, tol: float = 1e-3) -> OracleResult:
    """Whichever oracle applies to the group of ``s``."""
    if s.group.is_finite:
        return OracleResult(l2_signature_finite(s), "finite_group_closed_form")
    return l2_signature_torus(s, tol)


def betti_oracle(c: FreeComplex, p: int, tol: float = 1e-3) -> OracleResult:
    if c.group.is_finite:
        return OracleResult(l2_betti_finite(c, p), "finite_group_closed_form")
    return l2_betti_torus(c, p, tol)


# ---------------------------------------------------------------------------
# trace expressions


class Expr:
    """Non-commutative polynomial expression in group ring matrices."""

    def evaluate(self) -> GroupRingMatrix:
        raise NotImplementedError

    def push(self, level) -> QMatrix:
        raise NotImplementedError

    def degree(self) -> int:
        raise NotImplementedError

    def leaves(self) -> list[GroupRingMatrix]:
        raise NotImplementedError

    def __add__(self, other):
        return Sum((self, other))

    def __matmul__(self, other):
        return Product((self, other))


@dataclass(frozen=True, eq=False)
class Leaf(Expr):
    matrix: GroupRingMatrix

    def evaluate(self):
        return self.matrix

    def push(self, level):
        return self.matrix.push(level)

    def degree(self):
        return 1

    def leaves(self):
        return [self.matrix]


@dataclass(frozen=True, eq=False)
class Sum(Expr):
    terms: tuple

    def evaluate(self):
        vals = [t.evaluate() for t in self.terms]
        out = vals[0]
        for v in vals[1:]:
            out = out + v
        return out

    def push(self, level):
        vals = [t.push(level) for t in self.terms]
        out = vals[0]
        for v in vals[1:]:
            out = out + v
        return out

    def degree(self):
        return max(t.degree() for t in self.terms)

    def leaves(self):
        return [m for t in self.terms for m in t.leaves()]


@dataclass(frozen=True, eq=False)
class Product(Expr):
    factors: tuple

    def evaluate(self):
        vals = [t.evaluate() for t in self.factors]
        out = vals[0]
        for v in vals[1:]:
            out = out @ v
        return out

    def push(self, level):
        vals = [t.push(level) for t in self.factors]
        out = vals[0]
        for v in vals[1:]:
            out = out @ v
        return out

    def degree(self):
        return sum(t.degree() for t in self.factors)

    def leaves(self):
        return [m for t in self.factors for m in t.leaves()]


@dataclass(frozen=True, eq=False)
class Scale(Expr):
    coefficient: Rational
    inner: Expr

    def evaluate(self):
        return self.inner.evaluate().scale(self.coefficient)

    def push(self, level):
        return self.inner.push(level).scale(self.coefficient)

    def degree(self):
        return self.inner.degree()

    def leaves(self):
        return self.inner.leaves()


@dataclass(frozen=True, eq=False)
class Adjoint(Expr):
    inner: Expr

    def evaluate(self):
        return self.inner.evaluate().adjoint()

    def push(self, level):
        return self.inner.push(level).T

    def degree(self):
        return self.inner.degree()

    def leaves(self):
        return self.inner.leaves()


def vn_trace_expression(expr: Expr) -> Rational:
    """Evaluate ``expr`` in the group ring and take the von Neumann trace."""
    m = expr.evaluate()
    if m.nrows != m.ncols:
        raise ValueError(f"expression is not square: {m.shape}")
    return m.vn_trace()


def pushed_trace(expr: Expr, level) -> Fraction:
    """``tr(p(h_1[k], ..., h_d[k])) / [Gamma : Gamma_k]`` computed on the quotient.

    The trace is taken through sums, scalars and adjoints by linearity; for
    a product only the diagonal of the final multiplication is formed.
    """
    return Fraction(_raw_trace(expr, level), level.order)


def _raw_trace(expr: Expr, level):
    if isinstance(expr, Sum):
        return sum(_raw_trace(t, level) for t in expr.terms)
    if isinstance(expr, Scale):
        return expr.coefficient * _raw_trace(expr.inner, level)
    if isinstance(expr, Adjoint):
        return _raw_trace(expr.inner, level)
    if isinstance(expr, Product) and len(expr.factors) > 1:
        head = Product(expr.factors[:-1]).push(level) if len(expr.factors) > 2 else expr.factors[0].push(level)
        last = expr.factors[-1].push(level)
        if head.nrows != last.ncols:
            raise ValueError("expression is not square")
        tr = 0
        for i, row in head.rows.items():
            for j, v in row.items():
                w = last.rows.get(j, {}).get(i)
                if w is not None:
                    tr += v * w
        return tr
    m = expr.push(level)
    if m.nrows != m.ncols:
        raise ValueError("expression is not square")
    return m.trace()


def trace_oracle(expr: Expr) -> OracleResult:
    return OracleResult(vn_trace_expression(expr), "identity_coefficient")


def stable_from(expr: Expr) -> int:
    """Quotient size beyond which the pushed trace must equal the vn trace.

    For ``Z^m`` with cyclic quotients of size ``m_k`` the trace can only
    differ when some word of length ``<= degree * width`` in the product
    is a non-trivial element of ``m_k Z^m``, which needs ``m_k`` at most
    ``degree * width``.  The stated threshold is the stricter
    ``2 * degree * width``.
    """
    width = max((m.support_width() for m in expr.leaves()), default=0)
    return 2 * expr.degree() * width


def random_expression(rng, group, size: int, n_leaves: int = 2, max_degree: int = 3, support: int = 5, exponent: int = 4):
    """Random polynomial expression for property testing.

    Entries have at most ``support`` monomials of total degree at most
    ``exponent``; the expression has polynomial degree at most ``max_degree``.
    """
    monomials = [w for w in group.ball(exponent)]

    def rand_elem():
        terms = {}
        for _ in range(rng.randint(0, support)):
            w = rng.choice(monomials)
            terms[w] = terms.get(w, 0) + Fraction(rng.randint(-4, 4), rng.randint(1, 3))
        return GroupRingElement(group, terms)

    leaves = [
        Leaf(GroupRingMatrix(group, size, size, {(i, j): rand_elem() for i in range(size) for j in range(size)}))
        for _ in range(n_leaves)
    ]

    def build(deg):
        if deg == 1:
            x = rng.choice(leaves)
            return Adjoint(x) if rng.random() < 0.3 else x
        kind = rng.random()
        if kind < 0.6:
            split = rng.randint(1, deg - 1)
            return Product((build(split), build(deg - split)))
        if kind < 0.8:
            return Sum((build(deg), build(rng.randint(1, deg))))
        return Scale(Fraction(rng.randint(-3, 3), rng.randint(1, 3)), build(deg))

    return build(rng.randint(1, max_degree))


__all__ = [
    "OracleError",
    "OracleResult",
    "l2_signature_finite",
    "l2_betti_finite",
    "l2_signature_torus",
    "l2_betti_torus",
    "signature_oracle",
    "betti_oracle",
    "Expr",
    "Leaf",
    "Sum",
    "Product",
    "Scale",
    "Adjoint",
    "vn_trace_expression",
    "pushed_trace",
    "trace_oracle",
    "stable_from",
    "random_expression",
]

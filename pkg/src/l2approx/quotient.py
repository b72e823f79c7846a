"""Pushing symmetric complexes to finite quotients: Laplacians, harmonic
spaces, the middle-dimensional pairing and its exact inertia."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .chain import FreeComplex, SymmetricComplex, validate
from .groups import GroupError, GroupTower, TowerLevel
from .linalg import Inertia, QMatrix, as_rational, inertia, nullspace, rank

log = logging.getLogger(__name__)


class InvariantViolation(RuntimeError):
    """A mathematical invariant failed; this is a bug or a defective input."""


def _pushed_differential(c: FreeComplex, p: int, level: TowerLevel) -> QMatrix:
    return c.d(p).push(level)


def laplacian_at(c: FreeComplex, p: int, level: TowerLevel) -> QMatrix:
    """``c_{p+1}[k] c_{p+1}[k]^T + c_p[k]^T c_p[k]``."""
    up = _pushed_differential(c, p + 1, level)
    down = _pushed_differential(c, p, level)
    return up @ up.T + down.T @ down


@dataclass
class QuotientSnapshot:
    level: int
    index: int
    middle: int
    differentials: dict[int, QMatrix] = field(repr=False)
    laplacian: QMatrix = field(repr=False)
    harmonic_basis: QMatrix = field(repr=False)
    pairing: QMatrix = field(repr=False)
    inertia: Inertia
    chain_rank: int

    @property
    def signature(self) -> int:
        return self.inertia.signature

    @property
    def harmonic_dim(self) -> int:
        return self.harmonic_basis.ncols

    def normalized(self, x) -> Fraction:
        return Fraction(x, self.index)

    @property
    def sign_norm(self) -> Fraction:
        return Fraction(self.signature, self.index)


def snapshot(s: SymmetricComplex, level: TowerLevel, check: bool = True) -> QuotientSnapshot:
    """Push ``s`` to ``level`` and compute the pairing on harmonic middle chains.

    The homology pairing is realized on ``ker Delta_{2n}[k]``: with ``B`` an
    exact rational basis of that kernel its inertia is that of ``B^T f[k] B``
    (the Gram matrix ``B^T B`` is positive definite, so no orthonormalization
    is needed).
    """
    if level.group != s.group:
        raise GroupError("tower level belongs to a different group")
    if check:
        rep = validate(s)
        if not rep.ok:
            raise InvariantViolation(f"invalid symmetric complex: {rep.violations}")
    mid = s.middle
    c = s.base
    down = c.d(mid).push(level)
    up = c.d(mid + 1).push(level)
    lap = up @ up.T + down.T @ down
    basis = nullspace(lap)
    f = s.f(mid).push(level)
    pairing = basis.T @ f @ basis
    if not pairing.is_symmetric():
        raise InvariantViolation(f"harmonic pairing is not symmetric at level {level.k}")
    ine = inertia(pairing)
    if sum(ine) != basis.ncols:
        raise InvariantViolation("inertia counts do not add up to the harmonic dimension")
    return QuotientSnapshot(
        level=level.k,
        index=level.order,
        middle=mid,
        differentials={mid: down, mid + 1: up},
        laplacian=lap,
        harmonic_basis=basis,
        pairing=pairing,
        inertia=ine,
        chain_rank=c.rank(mid),
    )


def betti_k(c: FreeComplex | SymmetricComplex, p: int, level: TowerLevel) -> Fraction:
    """``dim_Q ker Delta_p[k] / [Gamma : Gamma_k]``."""
    if isinstance(c, SymmetricComplex):
        c = c.base
    if not 0 <= p <= c.dim:
        raise ValueError(f"degree {p} out of range 0..{c.dim}")
    lap = laplacian_at(c, p, level)
    return Fraction(lap.nrows - rank(lap), level.order)


def dim_k_chains(c: FreeComplex | SymmetricComplex, p: int, level: TowerLevel) -> Fraction:
    """Normalized dimension of the pushed chain module, always the rank ``r_p``."""
    if isinstance(c, SymmetricComplex):
        c = c.base
    size = c.d(p).push(level).ncols if p >= 1 else c.d(p + 1).push(level).nrows
    return Fraction(size, level.order)


def spectral_count(a: QMatrix, lo, hi) -> int:
    """Number of eigenvalues in ``(lo, hi]`` of a symmetric matrix, exactly."""
    lo, hi = as_rational(Fraction(lo)), as_rational(Fraction(hi))
    if lo > hi:
        raise ValueError("empty interval: lo > hi")
    at_most = lambda c: (lambda i: i.negative + i.zero)(inertia(a.shifted(c)))
    return at_most(hi) - at_most(lo)


# ---------------------------------------------------------------------------
# convergence driver


@dataclass
class ConvergenceRow:
    k: int
    index: int
    dim_k: Fraction
    b_plus: Fraction
    b_minus: Fraction
    b_zero: Fraction
    harmonic: Fraction
    sign: Fraction
    oracle: float | None = None
    oracle_bound: float | None = None

    @property
    def gap(self) -> float | None:
        if self.oracle is None:
            return None
        return abs(float(self.sign) - self.oracle)


@dataclass
class TowerRun:
    rows: list[ConvergenceRow]
    summary: dict


def _row_for_level(s: SymmetricComplex, level: TowerLevel) -> ConvergenceRow:
    snap = snapshot(s, level, check=False)
    n = snap.index
    ine = snap.inertia
    row = ConvergenceRow(
        k=level.k,
        index=n,
        dim_k=Fraction(snap.chain_rank * n, n),
        b_plus=Fraction(ine.positive, n),
        b_minus=Fraction(ine.negative, n),
        b_zero=Fraction(ine.zero, n),
        harmonic=Fraction(snap.harmonic_dim, n),
        sign=snap.sign_norm,
    )
    if row.dim_k != snap.chain_rank:
        raise InvariantViolation("normalized chain dimension differs from the rank")
    if row.b_plus + row.b_minus + row.b_zero != row.harmonic:
        raise InvariantViolation("conservation of harmonic dimension failed")
    return row


def _row_task(args):
    s, tower, k = args
    return _row_for_level(s, tower.level(k))


def run_tower(
    s: SymmetricComplex,
    tower: GroupTower,
    k_range: Sequence[int] | None = None,
    oracle=None,
    jobs: int = 1,
) -> TowerRun:
    """Normalized signature data at every requested level of the tower.

    ``oracle`` is an optional ``OracleResult`` for the limit; each row then
    records its distance to the oracle value.
    """
    if tower.group != s.group:
        raise GroupError("tower and complex are over different groups")
    rep = validate(s)
    if not rep.ok:
        raise InvariantViolation(f"invalid symmetric complex: {rep.violations}")
    ks = [lv.k for lv in tower.levels] if k_range is None else list(k_range)
    if not ks:
        raise ValueError("empty level range")
    if jobs > 1 and len(ks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(_row_task, [(s, tower, k) for k in ks], chunksize=max(1, len(ks) // (4 * jobs))))
    else:
        rows = [_row_for_level(s, tower.level(k)) for k in ks]
    if oracle is not None:
        for r in rows:
            r.oracle = oracle.value_float
            r.oracle_bound = oracle.tolerance
    return TowerRun(rows, summarize([r.sign for r in rows], rows, oracle))


def summarize(values: Sequence[Fraction], rows=None, oracle=None) -> dict:
    diffs = [b - a for a, b in zip(values, values[1:])]
    out = {
        "levels": len(values),
        "last": str(values[-1]) if values else None,
        "last_decimal": float(values[-1]) if values else None,
        "successive_differences": [str(d) for d in diffs],
        "max_abs_difference_last_half": (
            float(max(abs(d) for d in diffs[len(diffs) // 2 :])) if diffs else None
        ),
    }
    if oracle is not None:
        out["oracle"] = oracle.to_json()
        if values:
            out["gap"] = abs(float(values[-1]) - oracle.value_float)
    return out


@dataclass
class BettiRow:
    k: int
    index: int
    betti: dict[int, Fraction]
    oracle: dict[int, float] = field(default_factory=dict)
    oracle_bound: dict[int, float] = field(default_factory=dict)


def _betti_task(args):
    c, tower, k, degrees = args
    lv = tower.level(k)
    return BettiRow(k, lv.order, {p: betti_k(c, p, lv) for p in degrees})


def run_betti(
    c: FreeComplex,
    tower: GroupTower,
    degrees: Sequence[int] | None = None,
    k_range: Sequence[int] | None = None,
    oracles: dict | None = None,
    jobs: int = 1,
) -> list[BettiRow]:
    if tower.group != c.group:
        raise GroupError("tower and complex are over different groups")
    bad = c.square_zero_violations()
    if bad:
        raise InvariantViolation(f"c^2 != 0 in degrees {bad}")
    degrees = list(range(c.dim + 1)) if degrees is None else list(degrees)
    ks = [lv.k for lv in tower.levels] if k_range is None else list(k_range)
    tasks = [(c, tower, k, degrees) for k in ks]
    if jobs > 1 and len(ks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(_betti_task, tasks))
    else:
        rows = [_betti_task(t) for t in tasks]
    if oracles:
        for r in rows:
            for p, o in oracles.items():
                r.oracle[p] = o.value_float
                r.oracle_bound[p] = o.tolerance
    return rows

"""Convergence along amenable exhaustions: Betti numbers and signatures of
the finite pieces normalized by ``|X| / |X_k|``, plus the operator
diagnostic mode on bare self-adjoint group ring matrices."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from ..groupring import GroupRingMatrix
from ..groups import FreeAbelianGroup, Group
from ..linalg import Inertia, QMatrix, inertia, nullspace, rank
from ..quotient import InvariantViolation, spectral_count
from .cover import EquivariantComplex, FiniteSubcomplex, box
from .duality import cap_operator, truncate
from .simplicial import validate_homology_manifold

log = logging.getLogger(__name__)


@dataclass
class AmenableRow:
    k: int
    size: int
    trace_factor: Fraction
    betti: dict[int, Fraction] = field(default_factory=dict)
    inertia: Inertia | None = None
    sign: Fraction | None = None
    skipped: str | None = None
    oracle: dict = field(default_factory=dict)

    def gap(self, key) -> float | None:
        o = self.oracle.get(key)
        if o is None:
            return None
        val = self.sign if key == "sign" else self.betti.get(key)
        return None if val is None else abs(float(val) - o.value_float)


@dataclass
class AmenableRun:
    rows: list[AmenableRow]
    summary: dict


def _level_laplacians(e: EquivariantComplex, xk: FiniteSubcomplex, excluded: frozenset = frozenset()):
    """Truncated differentials and Laplacians on the cells of ``xk`` not in ``excluded``."""
    n = e.dim
    cells = {p: [c for c in xk.sorted_cells(p) if c not in excluded] for p in range(n + 1)}
    diffs = {}
    for p in range(1, n + 1):
        diffs[p] = truncate(e.boundary_matrix(p), e, cells[p - 1], cells[p], p - 1, p).matrix
    laps = {}
    for p in range(n + 1):
        size = len(cells[p])
        lap = QMatrix(size, size)
        if p + 1 in diffs:
            lap = lap + diffs[p + 1] @ diffs[p + 1].T
        if p in diffs:
            lap = lap + diffs[p].T @ diffs[p]
        laps[p] = lap
    return cells, diffs, laps


def level_row(
    e: EquivariantComplex, k: int, xk: FiniteSubcomplex, degrees: Sequence[int] | None = None, check: bool = True
) -> AmenableRow:
    """One row of the table for the finite piece ``xk``."""
    n = e.dim
    size = len(xk)
    tr = Fraction(e.size, size)
    row = AmenableRow(k, size, tr)
    real = xk.realize()
    rep = validate_homology_manifold(real) if check else None
    if rep is not None and not rep.ok:
        row.skipped = f"not a homology manifold: {rep.violations[:2]}"
        log.warning("level %s skipped: %s", k, row.skipped)
        return row
    degrees = list(range(n + 1)) if degrees is None else list(degrees)
    _, _, laps = _level_laplacians(e, xk)
    for p in degrees:
        lap = laps[p]
        row.betti[p] = (lap.nrows - rank(lap)) * tr
    if n % 4 == 0:
        yk = rep.boundary if rep is not None else validate_homology_manifold(real).boundary
        ycells = frozenset(e.cell_of(s) for s in yk)
        m = n // 2
        cells, _, rlaps = _level_laplacians(e, xk, ycells)
        basis = nullspace(rlaps[m])
        g = truncate(cap_operator(e, m), e, cells[m], cells[m], m, m).matrix
        pairing = basis.T @ g @ basis
        if not pairing.is_symmetric():
            raise InvariantViolation(f"harmonic pairing is not symmetric at exhaustion level {k}")
        row.inertia = inertia(pairing)
        row.sign = row.inertia.signature * tr
    return row


def _row_task(args):
    return level_row(*args)


def run_amenable(
    e: EquivariantComplex,
    exhaustion: Sequence[FiniteSubcomplex],
    degrees: Sequence[int] | None = None,
    levels: Sequence[int] | None = None,
    oracle_tol: float | None = None,
    check: bool = True,
    jobs: int = 1,
) -> AmenableRun:
    """Normalized Betti numbers (and signatures in dimensions ``4m``) along ``exhaustion``."""
    levels = list(levels) if levels is not None else list(range(1, len(exhaustion) + 1))
    tasks = [(e, k, x, degrees, check) for k, x in zip(levels, exhaustion)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(_row_task, tasks))
    else:
        rows = [_row_task(t) for t in tasks]
    oracles = {}
    if oracle_tol is not None:
        oracles = cover_oracles(e, degrees, oracle_tol)
        for r in rows:
            r.oracle = dict(oracles)
    return AmenableRun(rows, _summary(rows, oracles))


def cover_oracles(e: EquivariantComplex, degrees=None, tol: float = 1e-3) -> dict:
    from ..l2oracle import betti_oracle, signature_oracle
    from .duality import symmetric_structure

    out = {}
    if not (isinstance(e.group, FreeAbelianGroup) or e.group.is_finite):
        return out
    c = e.chain_complex()
    for p in (range(e.dim + 1) if degrees is None else degrees):
        out[p] = betti_oracle(c, p, tol)
    if e.dim % 4 == 0 and not e.boundary:
        out["sign"] = signature_oracle(symmetric_structure(e), tol)
    return out


def _summary(rows: Sequence[AmenableRow], oracles: dict) -> dict:
    live = [r for r in rows if r.skipped is None]
    out = {"levels": len(rows), "skipped": [r.k for r in rows if r.skipped]}
    if live:
        last = live[-1]
        out["last"] = {str(p): str(v) for p, v in last.betti.items()}
        if last.sign is not None:
            out["last"]["sign"] = str(last.sign)
        out["oracle"] = {str(p): o.to_json() for p, o in oracles.items()}
        out["gap"] = {str(p): last.gap(p) for p in oracles}
    return out


# ---------------------------------------------------------------------------
# operator diagnostic mode


def truncate_operator(a: GroupRingMatrix, support: Sequence) -> QMatrix:
    """``P A P*`` on coordinates ``(i, x)``, ``x`` in ``support``, ordered by ``i`` then ``x``."""
    g: Group = a.group
    xs = list(support)
    idx = {(i, x): i * len(xs) + j for i in range(a.ncols) for j, x in enumerate(xs)}
    m = QMatrix(a.nrows * len(xs), a.ncols * len(xs))
    for (i, j), elem in a.entries.items():
        for r, x in enumerate(xs):
            row = i * len(xs) + r
            for h, c in elem.terms.items():
                col = idx.get((j, g.mul(x, h)))
                if col is not None:
                    m.add_to(row, col, c)
    return m


@dataclass
class OperatorRow:
    k: int
    size: int
    inertia: Inertia
    sign: Fraction
    oracle: float | None = None
    oracle_bound: float | None = None

    @property
    def gap(self) -> float | None:
        return None if self.oracle is None else abs(float(self.sign) - self.oracle)


def _operator_task(args):
    a, k = args
    m = truncate_operator(a, box(a.group, k))
    ine = inertia(m)
    return OperatorRow(k, m.nrows, ine, Fraction(ine.signature * a.nrows, m.nrows))


def run_operator(a: GroupRingMatrix, ks: Sequence[int], oracle_tol: float | None = None, jobs: int = 1) -> list[OperatorRow]:
    """Inertia of ``P_k A P_k`` on boxes ``{-k..k}^m``, normalized by ``|X| / |X_k|``."""
    if not a.is_selfadjoint():
        raise ValueError("operator mode needs a self-adjoint matrix")
    tasks = [(a, k) for k in ks]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(_operator_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        rows = [_operator_task(t) for t in tasks]
    if oracle_tol is not None:
        from ..chain import from_form
        from ..l2oracle import signature_oracle

        o = signature_oracle(from_form(a), oracle_tol)
        for r in rows:
            r.oracle, r.oracle_bound = o.value_float, o.tolerance
    return rows


# ---------------------------------------------------------------------------
# small eigenvalues of truncated Laplacians


def truncated_small_eigenvalues(
    e: EquivariantComplex, xk: FiniteSubcomplex, p: int, eps_grid: Sequence
) -> list[dict]:
    """Small-eigenvalue count of the truncated integral Laplacian ``Delta_p[X_k]``.

    Both sides carry the factor ``|X| / |X_k|``; ``d_k`` is the number of
    ``p``-cells of ``X_k`` times that factor, which tends to ``r_p`` along a
    balanced exhaustion.
    """
    lap_gr = e.chain_complex().laplacian(p)
    if not lap_gr.is_integral():
        raise ValueError("the small-eigenvalue bound needs an integral Laplacian")
    K = max(1, lap_gr.norm_bound())
    _, _, laps = _level_laplacians(e, xk)
    lap = laps[p]
    tr = Fraction(e.size, len(xk))
    out = []
    for eps in eps_grid:
        eps = Fraction(eps)
        lhs = spectral_count(lap, 0, eps) * tr
        d_k = lap.nrows * tr
        rhs = float(d_k) * math.log(K) / -math.log(eps)
        out.append({"eps": str(eps), "lhs": str(lhs), "rhs_decimal": rhs, "ok": float(lhs) <= rhs + 1e-12})
    return out


__all__ = [
    "AmenableRow",
    "AmenableRun",
    "level_row",
    "run_amenable",
    "cover_oracles",
    "truncate_operator",
    "OperatorRow",
    "run_operator",
    "truncated_small_eigenvalues",
]

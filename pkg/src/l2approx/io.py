"""JSON input formats and CSV output.

Complex documents::

    {"group": {...}, "dim": N, "ranks": [...], "differentials": [matrix, ...],
     "duality": [matrix, ...]}                      symmetric complex
    {"group": {...}, "form": matrix, "n": 1}        form concentrated in degree 2n
    {"group": {...}, "builtin": "circle" | "torus" | "zero", "rank": r}

Amenable documents carry ``"type"``: ``"equivariant"`` (orbit simplices over
lifted vertices ``[v, g]``), ``"finite"`` (``"facets"``) or ``"operator"``
(``"matrix"``).  Exhaustions are ``{"folner": "box", "k_max": K}`` or
``{"levels": [[cell, ...], ...]}`` with cells ``[orbit, g]``.
"""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from .chain import (
    ChainComplexError,
    FreeComplex,
    SymmetricComplex,
    circle_complex,
    from_form,
    torus_complex,
    zero_complex,
)
from .groupring import GroupRingMatrix
from .groups import Group, GroupError, group_from_json
from .linalg import format_rational


class SchemaError(ValueError):
    """Input document does not follow the expected format."""


def load_json(path: str | Path) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: malformed JSON ({exc})") from exc
    except OSError as exc:
        raise SchemaError(f"{path}: cannot read ({exc.strerror})") from exc


def _require(d: dict, key: str, where: str):
    if not isinstance(d, dict):
        raise SchemaError(f"{where}: expected an object")
    if key not in d:
        raise SchemaError(f"{where}: missing key {key!r}")
    return d[key]


def _group(d: dict) -> Group:
    try:
        return group_from_json(d.get("group", {"kind": "trivial"}))
    except (GroupError, TypeError, ValueError) as exc:
        raise SchemaError(f"group: {exc}") from exc


def matrix_from_json(group: Group, d, where: str = "matrix") -> GroupRingMatrix:
    try:
        return GroupRingMatrix.from_json(group, d)
    except (GroupError, TypeError, ValueError, KeyError) as exc:
        raise SchemaError(f"{where}: {exc}") from exc


def complex_from_json(d: dict) -> FreeComplex | SymmetricComplex:
    """Parse a complex document; returns a ``SymmetricComplex`` when a duality is present."""
    if not isinstance(d, dict):
        raise SchemaError("complex document must be an object")
    g = _group(d)
    try:
        if "form" in d:
            return from_form(matrix_from_json(g, d["form"], "form"), int(d.get("n", 1)))
        if "builtin" in d:
            name = d["builtin"]
            if name == "circle":
                return circle_complex(g)
            if name == "torus":
                return torus_complex(g)
            if name == "zero":
                return zero_complex(g, int(d.get("rank", 1)), int(d.get("degree", 0)))
            raise SchemaError(f"unknown builtin complex {name!r}")
        ranks = _require(d, "ranks", "complex")
        diffs = [matrix_from_json(g, m, f"differentials[{i}]") for i, m in enumerate(_require(d, "differentials", "complex"))]
        if "dim" in d and int(d["dim"]) != len(ranks) - 1:
            raise SchemaError(f"dim {d['dim']} does not match {len(ranks)} ranks")
        base = FreeComplex.build(g, ranks, diffs)
        if "duality" not in d:
            return base
        dual = [matrix_from_json(g, m, f"duality[{i}]") for i, m in enumerate(d["duality"])]
        return SymmetricComplex(base, tuple(dual))
    except (ChainComplexError, GroupError) as exc:
        raise SchemaError(str(exc)) from exc


def complex_to_json(c: FreeComplex | SymmetricComplex) -> dict:
    base = c.base if isinstance(c, SymmetricComplex) else c
    out = {
        "group": base.group.descriptor(),
        "dim": base.dim,
        "ranks": list(base.ranks),
        "differentials": [m.to_json() for m in base.differentials],
    }
    if isinstance(c, SymmetricComplex):
        out["duality"] = [m.to_json() for m in c.duality]
    return out


def amenable_from_json(d: dict):
    """``(kind, object)`` with kind ``equivariant``, ``finite`` or ``operator``."""
    from .amenable import EquivariantComplex, SimplicialComplex
    from .amenable.simplicial import ComplexError

    kind = d.get("type", "equivariant") if isinstance(d, dict) else None
    if kind is None:
        raise SchemaError("amenable document must be an object")
    try:
        if kind == "operator":
            return kind, matrix_from_json(_group(d), _require(d, "matrix", "operator"))
        if kind == "finite":
            facets = [tuple(_vertex(v) for v in f) for f in _require(d, "facets", "finite complex")]
            bd = d.get("boundary")
            k = SimplicialComplex(facets)
            return kind, (k, SimplicialComplex(tuple(_vertex(v) for v in f) for f in bd) if bd else None)
        if kind == "equivariant":
            _require(d, "simplices", "equivariant complex")
            return kind, EquivariantComplex.from_json(d)
    except (ComplexError, GroupError, TypeError, ValueError, KeyError) as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(f"{kind}: {exc}") from exc
    raise SchemaError(f"unknown amenable document type {kind!r}")


def _vertex(v):
    return tuple(_vertex(x) for x in v) if isinstance(v, list) else v


def exhaustion_from_json(cover, d: dict | None, k_max: int | None = None):
    """``(levels, subcomplexes)`` for a cover."""
    from .amenable import FiniteSubcomplex, box_exhaustion

    d = d or {"folner": "box"}
    if "folner" in d:
        if d["folner"] != "box":
            raise SchemaError(f"unknown Folner rule {d['folner']!r}")
        kk = int(k_max if k_max is not None else d.get("k_max", 4))
        start = int(d.get("start", 1))
        ks = list(range(start, kk + 1))
        if not ks:
            raise SchemaError("empty exhaustion")
        return ks, box_exhaustion(cover, ks)
    levels = _require(d, "levels", "exhaustion")
    if not levels:
        raise SchemaError("empty exhaustion")
    g = cover.group
    seq = []
    for lv in levels:
        try:
            seq.append(FiniteSubcomplex(cover, [(int(o), g.coerce(x)) for o, x in lv]))
        except (GroupError, TypeError, ValueError) as exc:
            raise SchemaError(f"exhaustion level: {exc}") from exc
    if k_max is not None:
        seq = seq[:k_max]
    return list(range(1, len(seq) + 1)), seq


# ---------------------------------------------------------------------------
# CSV


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, Fraction) or isinstance(v, int):
        return format_rational(v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def read_rational(s: str) -> Fraction:
    return Fraction(s)


TOWER_COLUMNS = (
    "k",
    "index",
    "dim_k",
    "b_plus_norm",
    "b_minus_norm",
    "b_zero_norm",
    "sign_norm",
    "oracle",
    "oracle_bound",
    "gap",
)


def tower_csv(rows) -> str:
    return write_csv(
        TOWER_COLUMNS,
        [
            (r.k, r.index, r.dim_k, r.b_plus, r.b_minus, r.b_zero, r.sign, r.oracle, r.oracle_bound, r.gap)
            for r in rows
        ],
    )


def betti_csv(rows, degrees: Sequence[int]) -> str:
    header = ["k", "index"]
    for p in degrees:
        header += [f"b{p}_norm", f"b{p}_oracle", f"b{p}_oracle_bound", f"b{p}_gap"]
    out = []
    for r in rows:
        line = [r.k, r.index]
        for p in degrees:
            o = r.oracle.get(p)
            line += [r.betti[p], o, r.oracle_bound.get(p), None if o is None else abs(float(r.betti[p]) - o)]
        out.append(line)
    return write_csv(header, out)


def amenable_csv(rows, degrees: Sequence[int]) -> str:
    header = ["k", "size", "trace_factor"] + [f"b{p}_norm" for p in degrees]
    header += ["b_plus", "b_minus", "b_zero", "sign_norm", "valid"]
    header += [f"b{p}_gap" for p in degrees] + ["sign_gap"]
    out = []
    for r in rows:
        ine = r.inertia
        line = [r.k, r.size, r.trace_factor] + [r.betti.get(p) for p in degrees]
        line += [ine.positive if ine else None, ine.negative if ine else None, ine.zero if ine else None, r.sign]
        line += ["yes" if r.skipped is None else "no"]
        line += [r.gap(p) for p in degrees] + [r.gap("sign")]
        out.append(line)
    return write_csv(header, out)


def operator_csv(rows) -> str:
    return write_csv(
        ("k", "size", "b_plus", "b_minus", "b_zero", "sign_norm", "oracle", "oracle_bound", "gap"),
        [
            (r.k, r.size, r.inertia.positive, r.inertia.negative, r.inertia.zero, r.sign, r.oracle, r.oracle_bound, r.gap)
            for r in rows
        ],
    )


__all__ = [
    "SchemaError",
    "load_json",
    "matrix_from_json",
    "complex_from_json",
    "complex_to_json",
    "amenable_from_json",
    "exhaustion_from_json",
    "write_csv",
    "read_rational",
    "TOWER_COLUMNS",
    "tower_csv",
    "betti_csv",
    "amenable_csv",
    "operator_csv",
]

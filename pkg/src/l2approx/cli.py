"""Command-line front end.

Exit codes: 0 success, 2 schema or validation failure, 3 violated invariant.
Errors are written to stderr as a single JSON object.
"""

from __future__ import annotations

import argparse
import json
import logging
import random
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import __version__
from .chain import SymmetricComplex, validate
from .groups import GroupError, tower_from_json
from .io import (
    SchemaError,
    amenable_csv,
    amenable_from_json,
    betti_csv,
    complex_from_json,
    exhaustion_from_json,
    load_json,
    operator_csv,
    tower_csv,
)
from .quotient import InvariantViolation

log = logging.getLogger("l2approx")

EXIT_OK, EXIT_INVALID, EXIT_INVARIANT = 0, 2, 3
DEFAULT_EPS = ("1/10", "1/100", "1/1000")


class ValidationFailed(Exception):
    def __init__(self, report: dict):
        super().__init__(report.get("message", "validation failed"))
        self.report = report


@dataclass
class RunConfig:
    command: str
    input: Path | None
    tower: Path | None
    k_max: int | None
    oracle: float | None
    out: Path | None
    jobs: int
    seed: int
    summary: Path | None = None
    exhaustion: Path | None = None
    eps: tuple[str, ...] = DEFAULT_EPS

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> RunConfig:
        if ns.oracle is not None and ns.oracle <= 0:
            raise SchemaError("--oracle tolerance must be positive")
        if ns.k_max is not None and ns.k_max < 1:
            raise SchemaError("--k-max must be positive")
        if ns.jobs < 1:
            raise SchemaError("--jobs must be positive")
        return cls(
            command=ns.command,
            input=Path(ns.input) if ns.input else None,
            tower=Path(ns.tower) if getattr(ns, "tower", None) else None,
            k_max=ns.k_max,
            oracle=ns.oracle,
            out=Path(ns.out) if ns.out else None,
            jobs=ns.jobs,
            seed=ns.seed,
            summary=Path(ns.summary) if getattr(ns, "summary", None) else None,
            exhaustion=Path(ns.exhaustion) if getattr(ns, "exhaustion", None) else None,
            eps=tuple(ns.eps) if getattr(ns, "eps", None) else DEFAULT_EPS,
        )


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        cfg.out.write_text(text)


def _emit_summary(cfg: RunConfig, summary: dict) -> None:
    if cfg.summary is not None:
        cfg.summary.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")


def _need(path: Path | None, flag: str) -> Path:
    if path is None:
        raise SchemaError(f"{flag} is required")
    return path


def _tower(cfg: RunConfig, group):
    doc = load_json(_need(cfg.tower, "--tower"))
    if not isinstance(doc, dict):
        raise SchemaError("tower document must be an object")
    try:
        tower = tower_from_json(doc, cfg.k_max)
    except (GroupError, TypeError, ValueError) as exc:
        raise SchemaError(f"tower: {exc}") from exc
    if tower.group != group:
        raise SchemaError("tower and complex are over different groups")
    if not tower.levels:
        raise SchemaError("empty schedule")
    return tower


def _symmetric(cfg: RunConfig) -> SymmetricComplex:
    c = complex_from_json(load_json(_need(cfg.input, "--input")))
    if not isinstance(c, SymmetricComplex):
        raise SchemaError("tower-sign needs a complex with a duality (or a 'form')")
    rep = validate(c)
    if not rep.ok:
        raise ValidationFailed({"error": "validation", **rep.to_json()})
    return c


def cmd_tower_sign(cfg: RunConfig) -> int:
    from .l2oracle import signature_oracle
    from .quotient import run_tower

    s = _symmetric(cfg)
    tower = _tower(cfg, s.group)
    oracle = signature_oracle(s, cfg.oracle) if cfg.oracle is not None else None
    run = run_tower(s, tower, oracle=oracle, jobs=cfg.jobs)
    _emit(cfg, tower_csv(run.rows))
    _emit_summary(cfg, run.summary)
    return EXIT_OK


def cmd_tower_betti(cfg: RunConfig) -> int:
    from .l2oracle import betti_oracle
    from .quotient import run_betti

    c = complex_from_json(load_json(_need(cfg.input, "--input")))
    base = c.base if isinstance(c, SymmetricComplex) else c
    bad = base.square_zero_violations()
    if bad:
        raise ValidationFailed({"error": "validation", "ok": False, "violations": [{"kind": "square_zero", "degree": p} for p in bad]})
    tower = _tower(cfg, base.group)
    degrees = list(range(base.dim + 1))
    oracles = {p: betti_oracle(base, p, cfg.oracle) for p in degrees} if cfg.oracle is not None else None
    rows = run_betti(base, tower, degrees, oracles=oracles, jobs=cfg.jobs)
    _emit(cfg, betti_csv(rows, degrees))
    if oracles:
        _emit_summary(cfg, {"oracle": {str(p): o.to_json() for p, o in oracles.items()}})
    return EXIT_OK


def cmd_amenable(cfg: RunConfig) -> int:
    from .amenable import EquivariantComplex, run_amenable, run_operator

    doc = load_json(_need(cfg.input, "--input"))
    kind, obj = amenable_from_json(doc)
    if kind == "operator":
        kk = cfg.k_max if cfg.k_max is not None else int(doc.get("k_max", 16))
        if kk < 1:
            raise SchemaError("empty exhaustion")
        if not obj.is_selfadjoint():
            raise ValidationFailed({"error": "validation", "ok": False, "message": "operator is not self-adjoint"})
        rows = run_operator(obj, list(range(1, kk + 1)), cfg.oracle, cfg.jobs)
        _emit(cfg, operator_csv(rows))
        return EXIT_OK
    if kind == "finite":
        k, bd = obj
        e = EquivariantComplex.from_finite(k, bd)
    else:
        e = obj
    ex_doc = load_json(cfg.exhaustion) if cfg.exhaustion else doc.get("exhaustion")
    levels, seq = exhaustion_from_json(e, ex_doc, cfg.k_max)
    run = run_amenable(e, seq, levels=levels, oracle_tol=cfg.oracle, jobs=cfg.jobs)
    _emit(cfg, amenable_csv(run.rows, list(range(e.dim + 1))))
    _emit_summary(cfg, run.summary)
    return EXIT_OK


def cmd_diagnose(cfg: RunConfig) -> int:
    from .groups import FreeAbelianGroup
    from .l2oracle import pushed_trace, random_expression, stable_from, vn_trace_expression
    from .spectral import FilterError, build_p_eps, build_q_eps, replay_spec_control, small_eigenvalue_reports

    c = complex_from_json(load_json(_need(cfg.input, "--input")))
    base = c.base if isinstance(c, SymmetricComplex) else c
    tower = _tower(cfg, base.group)
    eps_grid = [Fraction(e) for e in cfg.eps]
    reports: list[dict] = []
    ok = True
    for lv in tower.levels:
        for p in range(base.dim + 1):
            if not base.laplacian(p).is_integral():
                reports.append({"name": "small_eigenvalues", "level": lv.k, "degree": p, "precondition": "non-integral Laplacian", "ok": True, "skipped": True})
                continue
            for r in small_eigenvalue_reports(base, p, lv, eps_grid):
                d = r.to_json()
                d.update(level=lv.k, degree=p)
                reports.append(d)
                if not r.ok:
                    raise InvariantViolation(f"small-eigenvalue bound violated: {d}")
    for lv in tower.levels:
        if lv.order > 32:
            continue
        for p in range(base.dim + 1):
            try:
                r = replay_spec_control(base, lv, Fraction(1, 4), degree=p)
            except (ValueError, FilterError) as exc:
                reports.append({"name": "spectral_control", "level": lv.k, "degree": p, "skipped": str(exc), "ok": True})
                continue
            d = r.to_json()
            d.update(level=lv.k, degree=p)
            reports.append(d)
            ok = ok and r.ok
    for eps in (Fraction(1, 2), Fraction(1, 4), Fraction(1, 10)):
        f = build_p_eps(eps, 4)
        reports.append({"name": "p_eps", "ok": f.check["ok"], **f.to_json()})
    q = build_q_eps(0, 1, Fraction(1, 4), 2)
    reports.append({"name": "q_eps", "ok": q.check["ok"], **q.to_json()})
    if isinstance(base.group, FreeAbelianGroup):
        from .groups import make_tower

        rng = random.Random(cfg.seed)
        fails = 0
        for _ in range(10):
            expr = random_expression(rng, base.group, 2, max_degree=2, exponent=2)
            m = stable_from(expr) + 1
            lv = make_tower(base.group, [m], nested=False).level(1)
            if pushed_trace(expr, lv) != vn_trace_expression(expr):
                fails += 1
        reports.append({"name": "trace_stabilization", "cases": 10, "failures": fails, "seed": cfg.seed, "ok": fails == 0})
        ok = ok and fails == 0
    bundle = {"ok": ok and all(r.get("ok", True) for r in reports), "reports": reports}
    _emit(cfg, json.dumps(bundle, indent=2, sort_keys=True) + "\n")
    return EXIT_OK if bundle["ok"] else EXIT_INVARIANT


def cmd_validate(cfg: RunConfig) -> int:
    doc = load_json(_need(cfg.input, "--input"))
    if isinstance(doc, dict) and "type" in doc:
        report = _validate_amenable(doc)
    else:
        c = complex_from_json(doc)
        report = validate(c).to_json()
        report["kind"] = "symmetric" if isinstance(c, SymmetricComplex) else "free"
    _emit(cfg, json.dumps(report, indent=2, sort_keys=True) + "\n")
    return EXIT_OK if report["ok"] else EXIT_INVALID


def _validate_amenable(doc: dict) -> dict:
    from .amenable import check_fundamental_class, orient, validate_homology_manifold
    from .amenable.simplicial import ComplexError

    kind, obj = amenable_from_json(doc)
    if kind == "operator":
        return {"kind": kind, "ok": obj.is_selfadjoint(), "message": "" if obj.is_selfadjoint() else "not self-adjoint"}
    if kind == "finite":
        k, bd = obj
        mrep = validate_homology_manifold(k, bd)
        rep = mrep.to_json()
        rep["kind"] = kind
        if rep["ok"]:
            bd = mrep.boundary
            try:
                signs = orient(k, bd)
                rep["fundamental_class"] = not check_fundamental_class(k, bd, signs)
            except ComplexError as exc:
                rep["ok"] = False
                rep["fundamental_class"] = False
                rep["message"] = str(exc)
        return rep
    e = obj
    bad = e.check_equivariance()
    c = e.chain_complex()
    vrep = validate(c).to_json()
    return {"kind": kind, "ok": not bad and vrep["ok"], "equivariance": bad, "chain": vrep, "orbits": [e.rank(p) for p in range(e.dim + 1)]}


COMMANDS = {
    "tower-sign": cmd_tower_sign,
    "tower-betti": cmd_tower_betti,
    "amenable": cmd_amenable,
    "diagnose": cmd_diagnose,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="l2approx", description="Exact approximation of L2-invariants by finite quotients and exhaustions.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--input", required=True, help="complex / amenable JSON document")
        if name in ("tower-sign", "tower-betti", "diagnose"):
            p.add_argument("--tower", required=True, help="tower JSON document")
        if name == "amenable":
            p.add_argument("--exhaustion", help="exhaustion JSON (default: box Folner sets)")
        if name == "diagnose":
            p.add_argument("--eps", nargs="+", help="eps grid as rationals, e.g. 1/10 1/100")
        p.add_argument("--k-max", type=int, dest="k_max")
        p.add_argument("--oracle", type=float, nargs="?", const=1e-3, default=None, metavar="TOL")
        p.add_argument("--out")
        p.add_argument("--summary", help="write the run summary JSON here")
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("-v", "--verbose", action="store_true")
    return ap


def _fail(code: int, kind: str, message: str, extra: dict | None = None) -> int:
    payload = {"error": kind, "message": message}
    if extra:
        payload.update(extra)
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    return code


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig.from_args(ns)
        return COMMANDS[cfg.command](cfg)
    except ValidationFailed as exc:
        return _fail(EXIT_INVALID, "validation", str(exc), exc.report)
    except SchemaError as exc:
        return _fail(EXIT_INVALID, "schema", str(exc))
    except InvariantViolation as exc:
        return _fail(EXIT_INVARIANT, "invariant", str(exc))
    except (GroupError, ValueError) as exc:
        return _fail(EXIT_INVALID, "validation", str(exc))


if __name__ == "__main__":
    sys.exit(main())

import csv
import io
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from l2approx.cli import main

from conftest import DATA


def run(capsys, *args):
    code = main([str(a) for a in args])
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return p


LINEAR6 = {"kind": "free_abelian", "rank": 1, "schedule": {"rule": "linear", "start": 2, "k_max": 6}}


def test_tower_sign_linear(capsys, tmp_path):
    tower = write(tmp_path, "t.json", LINEAR6)
    code, out, _ = run(capsys, "tower-sign", "--input", DATA / "form_2_t_tinv.json", "--tower", tower)
    assert code == 0
    got = [Fraction(r["sign_norm"]) for r in rows(out)]
    assert got == [Fraction(k - 1, k) if k % 2 == 0 else 1 for k in range(2, 7)]


def test_tower_sign_dyadic_zero(capsys):
    code, out, _ = run(capsys, "tower-sign", "--input", DATA / "form_t_tinv.json", "--tower", DATA / "tower_dyadic_z.json", "--k-max", 5)
    assert code == 0
    assert {r["sign_norm"] for r in rows(out)} == {"0"}


def test_tower_sign_finite_group(capsys):
    code, out, _ = run(capsys, "tower-sign", "--input", DATA / "form_unit_cyclic3.json", "--tower", DATA / "tower_cyclic3.json")
    assert code == 0
    assert {r["sign_norm"] for r in rows(out)} == {"1"}


def test_tower_sign_with_oracle_and_summary(capsys, tmp_path):
    summary = tmp_path / "s.json"
    tower = write(tmp_path, "t.json", LINEAR6)
    code, out, _ = run(
        capsys, "tower-sign", "--input", DATA / "form_2_t_tinv.json", "--tower", tower, "--oracle", "--summary", summary
    )
    assert code == 0
    last = rows(out)[-1]
    assert float(last["oracle"]) == pytest.approx(1.0)
    assert json.loads(summary.read_text())["oracle"]["method"] == "torus_sampling"


def test_tower_betti(capsys, tmp_path):
    tower = write(tmp_path, "t.json", LINEAR6)
    code, out, _ = run(capsys, "tower-betti", "--input", DATA / "circle_z.json", "--tower", tower)
    assert code == 0
    assert [r["b0_norm"] for r in rows(out)] == [f"1/{k}" for k in range(2, 7)]


def test_tower_betti_zero_and_trivial(capsys, tmp_path):
    zero = write(tmp_path, "z.json", {"group": {"kind": "free_abelian", "rank": 1}, "builtin": "zero", "rank": 2})
    code, out, _ = run(capsys, "tower-betti", "--input", zero, "--tower", DATA / "tower_dyadic_z.json", "--k-max", 3)
    assert code == 0 and {r["b0_norm"] for r in rows(out)} == {"2"}
    triv = write(
        tmp_path,
        "p.json",
        {"group": {"kind": "trivial"}, "ranks": [3, 2], "differentials": [{"rows": 3, "cols": 2, "entries": [[[{"g": None, "c": "1"}], []], [[{"g": None, "c": "-1"}], [{"g": None, "c": "1"}]], [[], [{"g": None, "c": "-1"}]]]}]},
    )
    ttower = write(tmp_path, "tt.json", {"kind": "trivial", "levels": 2})
    code, out, err = run(capsys, "tower-betti", "--input", triv, "--tower", ttower)
    assert code == 0, err
    assert [(r["b0_norm"], r["b1_norm"]) for r in rows(out)] == [("1", "0")] * 2


def test_amenable_line(capsys):
    code, out, _ = run(capsys, "amenable", "--input", DATA / "line_z.json", "--k-max", 4)
    assert code == 0
    got = rows(out)
    assert [r["b0_norm"] for r in got] == [f"2/{4 * k + 3}" for k in range(1, 5)]
    assert {r["valid"] for r in got} == {"yes"}


def test_amenable_operator(capsys):
    code, out, _ = run(capsys, "amenable", "--input", DATA / "operator_2_t_tinv.json", "--k-max", 8, "--oracle")
    assert code == 0
    assert {r["sign_norm"] for r in rows(out)} == {"1"}


def test_amenable_finite(capsys):
    code, out, _ = run(capsys, "amenable", "--input", DATA / "torus7.json", "--k-max", 1)
    assert code == 0
    r = rows(out)[0]
    assert (r["b0_norm"], r["b1_norm"], r["b2_norm"]) == ("1", "2", "1")


def test_amenable_empty_exhaustion(capsys, tmp_path):
    ex = write(tmp_path, "ex.json", {"levels": []})
    code, _, err = run(capsys, "amenable", "--input", DATA / "line_z.json", "--exhaustion", ex)
    assert code == 2
    assert json.loads(err)["error"] == "schema"


def test_diagnose_circle(capsys):
    code, out, _ = run(capsys, "diagnose", "--input", DATA / "circle_z.json", "--tower", DATA / "tower_dyadic_z.json", "--k-max", 4)
    assert code == 0
    bundle = json.loads(out)
    assert bundle["ok"] and all(r["ok"] for r in bundle["reports"])


def test_diagnose_non_integral_flagged(capsys, tmp_path):
    doc = json.loads((DATA / "circle_z.json").read_text())
    doc["differentials"][0]["entries"][0][0] = [{"g": [1], "c": "1/2"}, {"g": [0], "c": "-1/2"}]
    p = write(tmp_path, "half.json", doc)
    code, out, _ = run(capsys, "diagnose", "--input", p, "--tower", DATA / "tower_dyadic_z.json", "--k-max", 2)
    assert code == 0
    assert any(r.get("precondition") == "non-integral Laplacian" for r in json.loads(out)["reports"])


@pytest.mark.parametrize("name", sorted(p.name for p in DATA.glob("*.json") if not p.name.startswith("tower_")))
def test_validate_shipped(capsys, name):
    code, out, _ = run(capsys, "validate", "--input", DATA / name)
    assert code == 0, out
    assert json.loads(out)["ok"]


def test_validate_broken_differential(capsys, tmp_path):
    bad = {
        "group": {"kind": "trivial"},
        "ranks": [1, 1, 1],
        "differentials": [
            {"rows": 1, "cols": 1, "entries": [[[{"g": None, "c": "1"}]]]},
            {"rows": 1, "cols": 1, "entries": [[[{"g": None, "c": "1"}]]]},
        ],
    }
    code, out, _ = run(capsys, "validate", "--input", write(tmp_path, "b.json", bad))
    assert code == 2
    rep = json.loads(out)
    assert rep["violations"][0]["kind"] == "square_zero" and rep["violations"][0]["degree"] == 1


def test_validate_wedge(capsys, tmp_path):
    wedge = {"type": "finite", "facets": [[0, 1, 2], [0, 3, 4]]}
    code, out, _ = run(capsys, "validate", "--input", write(tmp_path, "w.json", wedge))
    assert code == 2
    assert "[0]" in json.dumps(json.loads(out)["violations"])


def test_malformed_json(capsys, tmp_path):
    code, _, err = run(capsys, "tower-sign", "--input", write(tmp_path, "x.json", "{nope"), "--tower", DATA / "tower_dyadic_z.json")
    assert code == 2
    assert json.loads(err)["error"] == "schema"


def test_empty_schedule(capsys, tmp_path):
    tower = write(tmp_path, "t.json", {"kind": "free_abelian", "rank": 1, "schedule": []})
    code, _, err = run(capsys, "tower-sign", "--input", DATA / "form_t_tinv.json", "--tower", tower)
    assert code == 2


def test_bad_flags(capsys):
    assert run(capsys, "tower-sign", "--input", DATA / "form_t_tinv.json", "--tower", DATA / "tower_dyadic_z.json", "--jobs", 0)[0] == 2
    assert run(capsys, "tower-sign", "--input", DATA / "form_t_tinv.json", "--tower", DATA / "tower_dyadic_z.json", "--oracle", "-1")[0] == 2
    assert run(capsys, "nonsense")[0] == 2


def test_asymmetric_pairing_exit_3(capsys, tmp_path):
    one = [{"g": None, "c": "1"}]
    z = lambda r, c: {"rows": r, "cols": c, "entries": [[[] for _ in range(c)] for _ in range(r)]}
    doc = {
        "group": {"kind": "trivial"},
        "ranks": [0, 0, 2, 0, 0],
        "differentials": [z(0, 0), z(0, 2), z(2, 0), z(0, 0)],
        "duality": [z(0, 0), z(0, 0), {"rows": 2, "cols": 2, "entries": [[[], one], [[], []]]}, z(0, 0), z(0, 0)],
    }
    tower = write(tmp_path, "t.json", {"kind": "trivial", "levels": 1})
    code, _, err = run(capsys, "tower-sign", "--input", write(tmp_path, "a.json", doc), "--tower", tower)
    assert code == 3
    assert json.loads(err)["error"] == "invariant"


def test_out_file_and_console_script(tmp_path):
    out = tmp_path / "o.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "l2approx.cli", "tower-sign", "--input", str(DATA / "form_t_tinv.json"), "--tower", str(DATA / "tower_dyadic_z.json"), "--k-max", "3", "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert out.read_text().splitlines()[0].startswith("k,index,dim_k")


def test_csv_rationals_round_trip(capsys, tmp_path):
    tower = write(tmp_path, "t.json", LINEAR6)
    _, out, _ = run(capsys, "tower-sign", "--input", DATA / "form_2_t_tinv.json", "--tower", tower)
    for r in rows(out):
        for col in ("b_plus_norm", "b_minus_norm", "b_zero_norm", "sign_norm"):
            q = Fraction(r[col])
            assert (f"{q.numerator}/{q.denominator}" if q.denominator != 1 else str(q.numerator)) == r[col]

from fractions import Fraction

import numpy as np
import pytest

from l2approx.chain import circle_complex, from_form, torus_complex, zero_complex
from l2approx.groupring import GroupRingMatrix
from l2approx.groups import TrivialGroup, make_tower
from l2approx.linalg import Inertia, QMatrix
from l2approx.quotient import betti_k, dim_k_chains, run_betti, run_tower, snapshot, spectral_count

from conftest import Z, Z2, lmat


def level(m, group=Z):
    return make_tower(group, [m], nested=False).level(1)


def test_snapshot_examples():
    s = from_form(lmat([{0: 2, 1: 1, -1: 1}]))
    snap = snapshot(s, level(2))
    assert snap.inertia == Inertia(1, 0, 1)
    assert snap.harmonic_dim == 2
    assert snap.sign_norm == Fraction(1, 2)
    assert snapshot(s, level(3)).sign_norm == 1
    snap = snapshot(from_form(lmat([{1: 1, -1: 1}])), level(4))
    assert snap.inertia == Inertia(1, 1, 2)
    assert snap.sign_norm == 0
    one = from_form(GroupRingMatrix.identity(TrivialGroup(), 1))
    assert snapshot(one, make_tower(TrivialGroup(), 1).level(1)).sign_norm == 1


def test_snapshot_against_numpy_eigenvalues():
    a = lmat([{0: 1, 2: Fraction(1, 2), -2: Fraction(1, 2)}, {1: -1}], [{-1: -1}, {0: -3, 1: 1, -1: 1}])
    s = from_form(a)
    for m in (2, 3, 5, 6, 9):
        ev = np.linalg.eigvalsh(np.array(a.push(level(m)).to_dense(), dtype=float))
        want = int((ev > 1e-9).sum()) - int((ev < -1e-9).sum())
        assert snapshot(s, level(m)).signature == want


def test_betti_examples():
    c = circle_complex(Z)
    for k in range(2, 20):
        assert betti_k(c, 0, level(k)) == Fraction(1, k)
    zc = zero_complex(Z, 3)
    assert betti_k(zc, 0, level(5)) == 3
    # trivial group: ordinary Betti numbers of a point
    assert betti_k(zero_complex(TrivialGroup(), 1), 0, make_tower(TrivialGroup(), 1).level(1)) == 1


def test_torus_betti():
    c = torus_complex(Z2)
    lv = make_tower(Z2, [3]).level(1)
    assert [betti_k(c, p, lv) for p in range(3)] == [Fraction(1, 9), Fraction(2, 9), Fraction(1, 9)]


def test_dim_k_is_rank():
    c = torus_complex(Z2)
    for m in (2, 4):
        lv = make_tower(Z2, [m]).level(1)
        assert [dim_k_chains(c, p, lv) for p in range(3)] == [1, 2, 1]


def test_spectral_count():
    lap = lmat([{0: 2, 1: -1, -1: -1}]).push(level(4))
    assert spectral_count(lap, 0, 2) == 2
    assert spectral_count(lap, 0, Fraction(1, 2)) == 0
    assert spectral_count(QMatrix.identity(3), 0, 1) == 3
    with pytest.raises(ValueError):
        spectral_count(lap, 1, 0)


def test_run_tower_linear_pattern():
    s = from_form(lmat([{0: 2, 1: 1, -1: 1}]))
    tower = make_tower(Z, list(range(2, 7)), nested=False, level_numbers=list(range(2, 7)))
    run = run_tower(s, tower)
    want = [Fraction(k - 1, k) if k % 2 == 0 else 1 for k in range(2, 7)]
    assert [r.sign for r in run.rows] == want


def test_run_tower_dyadic_t_plus_tinv_is_zero():
    s = from_form(lmat([{1: 1, -1: 1}]))
    run = run_tower(s, make_tower(Z, 5))
    assert all(r.sign == 0 for r in run.rows)


def test_run_tower_trivial_group_constant():
    g = TrivialGroup()
    s = from_form(GroupRingMatrix.from_rows(g, [[1, 0], [0, -1]]))
    rows = run_tower(s, make_tower(g, 3)).rows
    assert {r.sign for r in rows} == {0}


def test_run_betti_rows():
    rows = run_betti(circle_complex(Z), make_tower(Z, 3))
    assert [r.betti[1] for r in rows] == [Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)]

from fractions import Fraction

import numpy as np
import pytest

from l2approx.groupring import GroupRingElement, GroupRingMatrix, laurent
from l2approx.groups import FreeAbelianGroup, make_tower
from l2approx.linalg import QMatrix

from conftest import Z, lmat, t


def test_involve():
    assert (3 * t()).involve() == 3 * t(-1)
    assert GroupRingElement.scalar(Z, 5).involve() == GroupRingElement.scalar(Z, 5)
    assert (2 * t() + 7 * t(-2)).involve() == 2 * t(-1) + 7 * t(2)


def test_adjoint():
    assert lmat([{1: 1}]).adjoint() == lmat([{-1: 1}])
    assert GroupRingMatrix.identity(Z, 3).adjoint() == GroupRingMatrix.identity(Z, 3)
    a = GroupRingMatrix.from_rows(Z, [[0, t()], [1, 0]])
    assert a.adjoint() == GroupRingMatrix.from_rows(Z, [[0, 1], [t(-1), 0]])


def test_vn_trace():
    assert lmat([{1: 1}]).vn_trace() == 0
    assert lmat([{0: 3, 1: 1}]).vn_trace() == 3
    h = lmat([{1: 1, -1: 1}])
    assert (h @ h).vn_trace() == 2


def test_push_examples():
    lv = make_tower(Z, [4]).level(1)
    assert lmat([{1: 1}]).push(lv) == lv.regular_representation((1,))
    assert GroupRingMatrix.identity(Z, 2).push(lv) == QMatrix.identity(8)
    lv3 = make_tower(Z, [3]).level(1)
    assert lmat([{0: 2, 1: -1, -1: -1}]).push(lv3).to_dense() == [[2, -1, -1], [-1, 2, -1], [-1, -1, 2]]


def test_push_is_multiplicative_and_respects_adjoint():
    a = lmat([{0: 1, 1: 2}, {2: -1}], [{-1: Fraction(1, 2)}, {0: 3}])
    b = lmat([{1: 1}, {0: 1}], [{-3: 1}, {1: 1, 0: -1}])
    for m in (2, 3, 5, 8):
        lv = make_tower(Z, [m], nested=False).level(1)
        assert (a @ b).push(lv) == a.push(lv) @ b.push(lv)
        assert a.adjoint().push(lv) == a.push(lv).T
        assert (a + b).push(lv) == a.push(lv) + b.push(lv)


def test_norm_bound():
    assert lmat([{1: 1}]).norm_bound() == 1
    lap = lmat([{0: 2, 1: -1, -1: -1}])
    assert lap.norm_bound() == 4
    assert GroupRingMatrix.zeros(Z, 2, 2).norm_bound() == 0


def test_norm_bound_dominates_pushed_spectra():
    a = lmat([{0: 1, 1: -2}, {1: 1}], [{-1: 1}, {0: -1, 2: 3}])
    aa = a.adjoint() @ a
    bound = float(a.norm_bound())
    for m in (2, 3, 7, 16):
        lv = make_tower(Z, [m], nested=False).level(1)
        ev = np.linalg.eigvalsh(np.array(aa.push(lv).to_dense(), dtype=float))
        assert ev.max() ** 0.5 <= bound + 1e-9


def test_support_width_and_integrality():
    a = lmat([{3: 1, -1: Fraction(1, 2)}])
    assert a.support_width() == 3
    assert not a.is_integral()
    assert lmat([{0: 2}]).is_integral()


def test_json_round_trip():
    z2 = FreeAbelianGroup(2)
    a = GroupRingMatrix.from_rows(z2, [[laurent(z2, {(1, 0): 2, (0, -1): Fraction(-1, 3)}), 0]])
    assert GroupRingMatrix.from_json(z2, a.to_json()) == a


def test_group_mismatch_rejected():
    with pytest.raises(Exception):
        lmat([{0: 1}]) + GroupRingMatrix.identity(FreeAbelianGroup(2), 1)

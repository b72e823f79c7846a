from fractions import Fraction

import numpy as np
import pytest

from l2approx.linalg import (
    Inertia,
    QMatrix,
    charpoly,
    format_rational,
    inertia,
    nullspace,
    rank,
)


def circulant(first_row):
    n = len(first_row)
    return QMatrix.from_dense([[first_row[(j - i) % n] for j in range(n)] for i in range(n)])


@pytest.mark.parametrize(
    "m, expected",
    [
        (QMatrix.diag([2, -3]), Inertia(1, 1, 0)),
        (QMatrix.from_dense([[0, 1], [1, 0]]), Inertia(1, 1, 0)),
        (circulant([0, 1, 1]), Inertia(1, 2, 0)),
        (QMatrix.zeros(3, 3), Inertia(0, 0, 3)),
    ],
)
def test_inertia_examples(m, expected):
    assert inertia(m) == expected


def test_inertia_matches_numpy_on_circulants():
    for n in range(2, 12):
        m = circulant([0, 1] + [0] * (n - 3) + [1]) if n > 2 else QMatrix.from_dense([[0, 2], [2, 0]])
        ev = np.linalg.eigvalsh(np.array(m.to_dense(), dtype=float))
        want = (int((ev > 1e-9).sum()), int((ev < -1e-9).sum()), int((abs(ev) <= 1e-9).sum()))
        assert tuple(inertia(m)) == want


def test_rank_and_nullspace():
    m = QMatrix.from_dense([[1, 2, 3], [2, 4, 6], [1, 0, 1]])
    assert rank(m) == 2
    ns = nullspace(m)
    assert ns.ncols == 1
    assert (m @ ns).nnz() == 0


def test_nullspace_of_zero_is_identity():
    ns = nullspace(QMatrix.zeros(2, 3))
    assert ns.ncols == 3 and rank(ns) == 3


def test_charpoly_of_circulant():
    # 2 - t - t^-1 mod 3 has eigenvalues 0, 3, 3
    cp = charpoly(circulant([2, -1, -1]))
    # x (x - 3)^2 = x^3 - 6x^2 + 9x, ascending
    assert cp == [0, 9, -6, 1]


def test_exact_arithmetic_has_no_floats():
    m = QMatrix.from_dense([[Fraction(1, 3), 1], [1, Fraction(1, 7)]])
    ine = inertia(m)
    assert ine == Inertia(1, 1, 0)
    assert all(isinstance(v, (int, Fraction)) for _, _, v in m.items())


def test_format_rational():
    assert format_rational(Fraction(3, 4)) == "3/4"
    assert format_rational(Fraction(4, 2)) == "2"
    assert format_rational(-1) == "-1"

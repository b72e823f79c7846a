import random
from fractions import Fraction

import pytest

from l2approx.chain import circle_complex, direct_sum_complex, from_form, torus_complex, zero_complex
from l2approx.groupring import GroupRingMatrix
from l2approx.groupring import GroupRingElement
from l2approx.groups import GroupError, TrivialGroup, cyclic_group, make_tower
from l2approx.l2oracle import (
    METHODS,
    Adjoint,
    Leaf,
    OracleResult,
    Product,
    Scale,
    Sum,
    betti_oracle,
    l2_betti_torus,
    l2_signature_finite,
    l2_signature_torus,
    pushed_trace,
    random_expression,
    signature_oracle,
    stable_from,
    vn_trace_expression,
)
from l2approx.quotient import run_tower

from conftest import Z, Z2, lmat


def test_signature_finite_examples():
    g = TrivialGroup()
    assert l2_signature_finite(from_form(GroupRingMatrix.identity(g, 1))) == 1
    z3 = cyclic_group(3)
    assert l2_signature_finite(from_form(GroupRingMatrix.identity(z3, 1))) == 1
    assert l2_signature_finite(from_form(GroupRingMatrix.from_rows(g, [[1, 0], [0, -1]]))) == 0


def test_signature_finite_rejects_infinite():
    with pytest.raises(GroupError):
        l2_signature_finite(from_form(lmat([{0: 1}])))


def test_finite_oracle_equals_tower_at_every_level():
    z3 = cyclic_group(3)
    # 1 - 2u - 2u^2 on Z/3 has eigenvalues -3, 3, 3
    s = from_form(GroupRingMatrix(z3, 1, 1, {(0, 0): GroupRingElement(z3, {0: 1, 1: -2, 2: -2})}))
    want = l2_signature_finite(s)
    assert want == Fraction(1, 3)
    assert all(r.sign == want for r in run_tower(s, make_tower(z3, 4)).rows)


@pytest.mark.parametrize(
    "form, value",
    [({1: 1, -1: 1}, 0), ({0: 2, 1: 1, -1: 1}, 1), ({0: 1}, 1), ({0: -1, 1: 1, -1: 1}, Fraction(-1, 3))],
)
def test_signature_torus(form, value):
    res = l2_signature_torus(from_form(lmat([form])), tol=1e-3)
    assert res.method == "torus_sampling"
    # -1 + 2cos(theta) > 0 on |theta| < pi/3: value 1/3 - 2/3
    assert abs(res.value - float(value)) <= max(res.tolerance, 1e-3) + 2e-3


def test_betti_torus():
    assert l2_betti_torus(circle_complex(Z), 0).value == pytest.approx(0)
    assert l2_betti_torus(zero_complex(Z, 2), 0).value == pytest.approx(2)
    two = direct_sum_complex(circle_complex(Z), circle_complex(Z))
    assert l2_betti_torus(two, 0).value == pytest.approx(0)
    assert l2_betti_torus(torus_complex(Z2), 1).value == pytest.approx(0)


def test_dispatch_and_result_invariants():
    r = signature_oracle(from_form(GroupRingMatrix.identity(TrivialGroup(), 1)))
    assert r.exact and r.tolerance == 0 and r.method in METHODS
    r = betti_oracle(circle_complex(Z), 0, 1e-3)
    assert r.method == "torus_sampling"
    with pytest.raises(Exception):
        OracleResult(Fraction(1), "identity_coefficient", tolerance=0.1)


def test_vn_trace_expression_examples():
    h = Leaf(lmat([{1: 1, -1: 1}]))
    assert vn_trace_expression(Product((h, h))) == 2
    zero = Leaf(GroupRingMatrix.zeros(Z, 2, 2))
    assert vn_trace_expression(Sum((Product((zero, zero)), Scale(Fraction(3), zero)))) == 0
    assert vn_trace_expression(Product((Leaf(lmat([{1: 1}])), Leaf(lmat([{-1: 1}]))))) == 1


def test_adjoint_expression():
    a = Leaf(lmat([{0: 1, 2: 3}]))
    assert vn_trace_expression(Product((Adjoint(a), a))) == 10


def test_pushed_trace_stabilizes():
    rng = random.Random(7)
    for group in (Z, Z2):
        for _ in range(10):
            e = random_expression(rng, group, 2)
            m0 = stable_from(e) + 1
            want = vn_trace_expression(e)
            for m in (m0, m0 + 3):
                lv = make_tower(group, [m], nested=False).level(1)
                assert pushed_trace(e, lv) == want


def test_pushed_trace_wraps_below_bound():
    # t^2 folds onto the identity modulo 2
    e = Leaf(lmat([{2: 1}]))
    assert pushed_trace(e, make_tower(Z, [2]).level(1)) == 1
    assert vn_trace_expression(e) == 0

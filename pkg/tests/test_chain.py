import pytest

from l2approx.chain import (
    ChainComplexError,
    ChainMap,
    FreeComplex,
    SymmetricComplex,
    circle_complex,
    cone,
    direct_sum,
    dual,
    from_form,
    hyperbolic,
    suspension,
    torus_complex,
    validate,
    zero_complex,
)
from l2approx.groupring import GroupRingMatrix
from l2approx.groups import TrivialGroup, make_tower
from l2approx.quotient import betti_k

from conftest import Z, Z2, lmat


def test_dual_of_circle():
    c = circle_complex(Z)
    d = dual(c)
    assert d.ranks == (1, 1)
    assert d.d(1) == lmat([{-1: 1, 0: -1}])


def test_dual_one_term_and_zero():
    c = zero_complex(Z, 2, 2)
    d = dual(c)
    assert d.ranks == (2, 0, 0)
    assert all(x.is_zero() for x in d.differentials)


def test_cone_of_identity_is_acyclic():
    c = zero_complex(Z, 1)
    cn = cone(ChainMap(c, c, (GroupRingMatrix.identity(Z, 1),)))
    for m in (2, 3, 4):
        lv = make_tower(Z, [m]).level(1)
        assert all(betti_k(cn, p, lv) == 0 for p in range(cn.dim + 1))


def test_cone_of_zero_map_ranks():
    a, b = zero_complex(Z, 2), zero_complex(Z, 3)
    cn = cone(ChainMap(a, b, (GroupRingMatrix.zeros(Z, 3, 2),)))
    assert cn.ranks == (3, 2)


def test_cone_of_t_minus_one_is_circle():
    c = zero_complex(Z, 1)
    cn = cone(ChainMap(c, c, (lmat([{1: 1, 0: -1}]),)))
    assert cn.ranks == circle_complex(Z).ranks
    assert cn.d(1) == circle_complex(Z).d(1)


def test_cone_rejects_non_chain_map():
    c = circle_complex(Z)
    bad = ChainMap(c, c, (GroupRingMatrix.identity(Z, 1), lmat([{0: 2}])))
    with pytest.raises(ChainComplexError):
        cone(bad)


def test_from_form():
    assert validate(from_form(lmat([{1: 1, -1: 1}]))).ok
    with pytest.raises(ChainComplexError):
        from_form(lmat([{1: 1}]))


def test_validate_detects_square_nonzero():
    bad = FreeComplex.build(Z, (1, 1, 1), (lmat([{0: 1}]), lmat([{0: 1}])))
    rep = validate(bad)
    assert not rep.ok and rep.violations[0]["degree"] == 1


def test_torus_square_zero():
    assert validate(torus_complex(Z2)).ok


def test_suspension_negates():
    c = circle_complex(Z)
    s = suspension(c)
    assert s.ranks == (0, 1, 1)
    assert s.d(2) == -c.d(1)
    assert validate(s).ok


def test_hyperbolic_and_direct_sum_validate():
    h = hyperbolic(circle_complex(Z), 4)
    assert validate(h).ok
    f = from_form(lmat([{0: 1}]))
    assert validate(direct_sum(f, f)).ok


def test_duality_shape_checked():
    base = zero_complex(TrivialGroup(), 1, 4)
    with pytest.raises(ChainComplexError):
        SymmetricComplex(base, (GroupRingMatrix.zeros(TrivialGroup(), 1, 1),))

import pytest

from l2approx.groups import (
    FiniteGroup,
    FreeAbelianGroup,
    GroupError,
    TrivialGroup,
    cyclic_group,
    make_tower,
    tower_from_json,
)
from l2approx.linalg import QMatrix

Z, Z2 = FreeAbelianGroup(1), FreeAbelianGroup(2)
KLEIN = FiniteGroup([[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]])


def test_free_abelian_tower_orders():
    tower = make_tower(Z, [2, 4, 8])
    assert [lv.order for lv in tower.levels] == [2, 4, 8]


def test_trivial_and_finite_towers_are_constant():
    assert all(lv.order == 1 for lv in make_tower(TrivialGroup(), 3).levels)
    z3 = cyclic_group(3)
    tower = make_tower(z3, 4)
    assert [lv.order for lv in tower.levels] == [3, 3, 3, 3]
    assert all(tower.level(2).project(g) == g for g in z3.elements)


def test_nested_schedule_needs_divisibility():
    with pytest.raises(GroupError):
        make_tower(Z, [2, 3])
    assert len(make_tower(Z, [2, 3], nested=False)) == 2


@pytest.mark.parametrize("sched", [[], [4, 2], [0, 2]])
def test_bad_schedules(sched):
    with pytest.raises(GroupError):
        make_tower(Z, sched)


def test_project():
    lv = make_tower(Z, [4]).level(1)
    assert lv.project(Z.mul((3,), (2,))) == (1,)
    assert make_tower(Z2, [2]).level(1).project((3, -1)) == (1, 1)
    assert make_tower(TrivialGroup(), 1).level(1).project(()) == ()


def test_regular_representation_cyclic_shift():
    lv = make_tower(Z, [4]).level(1)
    m = lv.regular_representation((1,))
    assert m.to_dense() == [[1 if j == (i + 1) % 4 else 0 for j in range(4)] for i in range(4)]
    assert lv.regular_representation((0,)) == QMatrix.identity(4)


def test_regular_representation_klein():
    lv = make_tower(KLEIN, 1).level(1)
    m = lv.regular_representation(1)
    # right multiplication by 1 swaps 0<->1 and 2<->3
    assert m.to_dense() == [[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]


def test_regular_representation_is_a_homomorphism():
    lv = make_tower(Z2, [3]).level(1)
    a, b = (1, 2), (2, 2)
    assert lv.regular_representation(a) @ lv.regular_representation(b) == lv.regular_representation(lv.quotient_mul(a, b))


@pytest.mark.parametrize("g, n", [((3,), 3), ((-2,), 2), ((0,), 0)])
def test_word_length_z(g, n):
    assert Z.word_length(g) == n


def test_word_length_z2():
    assert Z2.word_length((2, -1)) == 3
    assert Z2.word_length(Z2.identity) == 0


def test_finite_group_validation():
    with pytest.raises(GroupError):
        FiniteGroup([[0, 1], [0, 1]])
    with pytest.raises(GroupError):
        FiniteGroup([])


def test_tower_from_json_linear():
    tower = tower_from_json({"kind": "free_abelian", "rank": 1, "schedule": {"rule": "linear", "start": 2, "k_max": 6}})
    assert [(lv.k, lv.order) for lv in tower.levels] == [(k, k) for k in range(2, 7)]
    assert not tower.nested


def test_tower_from_json_k_max_truncates():
    tower = tower_from_json({"kind": "free_abelian", "rank": 1, "schedule": [2, 4, 8, 16]}, k_max=2)
    assert [lv.order for lv in tower.levels] == [2, 4]


def test_tower_descriptor_round_trip():
    tower = make_tower(Z2, [2, 4])
    again = tower_from_json(tower.descriptor())
    assert [lv.order for lv in again.levels] == [4, 16]

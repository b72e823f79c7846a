import pytest

from l2approx.amenable import (
    EquivariantComplex,
    SimplicialComplex,
    box_exhaustion,
    cap_operator,
    cycle_graph,
    line_cover,
    plane_cover,
    restriction_check,
    restriction_check_cover,
    segment,
    symmetric_structure,
    thicken,
    boundary_of_simplex,
    truncate,
)
from l2approx.amenable.duality import to_rational
from l2approx.chain import validate
from l2approx.groupring import GroupRingMatrix
from l2approx.linalg import QMatrix

from conftest import lmat


def test_cap_on_trivial_circle():
    e = EquivariantComplex.from_finite(cycle_graph(3))
    g = to_rational(cap_operator(e, 1))
    assert g.shape == (3, 3)
    # each edge caps to its front vertex with the orientation sign
    for j in range(3):
        col = g.column(j)
        assert len(col) == 1 and abs(next(iter(col.values()))) == 1


def test_cap_on_line():
    g = cap_operator(line_cover(), 1)
    assert g.shape == (1, 1)
    ent = g[0, 0]
    assert len(ent.terms) == 1
    (w, c), = ent.terms.items()
    assert abs(c) == 1 and w in ((0,), (1,), (-1,))


def test_cap_out_of_range_is_zero():
    assert cap_operator(line_cover(), 3).is_zero()


@pytest.mark.parametrize("e", [line_cover(), line_cover(3), plane_cover()], ids=["line1", "line3", "plane"])
def test_symmetric_structure_validates(e):
    assert validate(symmetric_structure(e)).ok


def test_truncate_identity_and_shift():
    e = line_cover()
    x = box_exhaustion(e, [2])[0]
    verts = x.sorted_cells(0)
    ident = truncate(GroupRingMatrix.identity(e.group, 1), e, verts, verts, 0, 0).matrix
    assert ident == QMatrix.identity(len(verts))
    shift = truncate(lmat([{1: 1}]), e, verts, verts, 0, 0).matrix
    n = len(verts)
    assert shift.to_dense() == [[1 if j == i + 1 else 0 for j in range(n)] for i in range(n)]


def test_restriction_segment_in_line():
    e = line_cover()
    for k in (1, 2, 4):
        rep = restriction_check_cover(e, box_exhaustion(e, [k])[0])
        assert rep.ok, rep.to_json()


def test_restriction_square_in_plane():
    e = plane_cover()
    rep = restriction_check_cover(e, box_exhaustion(e, [1])[0])
    assert rep.ok, rep.to_json()


def test_restriction_whole_finite_complex():
    k = boundary_of_simplex(3)
    assert restriction_check(k, None, k).ok


def test_restriction_thickened():
    k = boundary_of_simplex(3)
    th = thicken(k, SimplicialComplex([(0, 1)]))
    sd = k.barycentric()
    assert restriction_check(sd, None, th.x, th.y).ok


def test_restriction_structural_violation_flagged():
    # U = one edge of a path, V = one endpoint: the neighbouring edge meets U - V
    k = segment(3)
    u = SimplicialComplex([(1, 2)])
    rep = restriction_check(k, SimplicialComplex([(0,), (3,)]), u, SimplicialComplex([(2,)]))
    assert not rep.ok

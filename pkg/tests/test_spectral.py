import math
from fractions import Fraction

import numpy as np
import pytest

from l2approx.chain import circle_complex, from_form, zero_complex
from l2approx.groups import make_tower
from l2approx.linalg import QMatrix
from l2approx.quotient import laplacian_at
from l2approx.spectral import (
    FilterError,
    build_p_eps,
    build_q_eps,
    check_small_eigenvalue_bound,
    log_det_prime,
    replay_spec_control,
    small_eigenvalue_reports,
)

from conftest import Z, lmat


def level(m):
    return make_tower(Z, [m], nested=False).level(1)


def test_p_eps_examples():
    p = build_p_eps(Fraction(1, 2), 1)
    assert p.params["d"] == 3 and p.degree == 6
    for eps in (Fraction(1, 2), Fraction(1, 10), Fraction(1, 100)):
        assert build_p_eps(eps, 3)(0) == 1
    assert build_p_eps(Fraction(1, 4), 2)(2) == 0


def test_p_eps_degree_is_minimal():
    for eps, K in [(Fraction(1, 3), 2), (Fraction(1, 10), 4), (Fraction(1, 7), 1)]:
        d = build_p_eps(eps, K).params["d"]
        y = 1 - (eps / K) ** 2
        assert y**d <= eps < y ** (d - 1)


def test_p_eps_constraints_dense_grid():
    eps, K = Fraction(1, 5), Fraction(3)
    p = build_p_eps(eps, K)
    for i in range(-240, 241):
        x = K * Fraction(i, 240)
        v = p(x)
        assert 0 <= v <= 1 + eps
        if abs(x) >= eps:
            assert v <= eps
    assert p.coefficients()[0] == 1


def test_p_eps_rejects_bad_parameters():
    for eps, K in [(0, 1), (1, 1), (Fraction(1, 2), Fraction(1, 2))]:
        with pytest.raises(FilterError):
            build_p_eps(eps, K)


def test_q_eps_bands():
    a, b, eps, K = Fraction(0), Fraction(1), Fraction(1, 4), Fraction(1)
    q = build_q_eps(a, b, eps, K)
    assert q(-K) <= 0
    mid = q((a + b) / 2)
    assert 1 - eps <= mid <= 1
    for i in range(-64, 65):
        x = K * Fraction(i, 64)
        v = q(x)
        chi = 1 if a < x < b else 0
        assert -1 <= v <= chi
        if x <= a or x >= b or a + eps <= x <= b - eps:
            assert v >= chi - eps


def test_q_eps_float_matches_exact():
    q = build_q_eps(Fraction(-1, 2), Fraction(1, 2), Fraction(1, 5), 1)
    for x in (Fraction(-1), Fraction(0), Fraction(1, 3)):
        assert q.evaluate_float(float(x)) == pytest.approx(float(q(x)), abs=1e-9)


def test_q_eps_degenerate():
    with pytest.raises(FilterError):
        build_q_eps(0, 1, Fraction(1, 2), 1)
    with pytest.raises(FilterError):
        build_q_eps(1, 0, Fraction(1, 10), 1)


def test_log_det_prime_examples():
    assert log_det_prime(QMatrix.diag([2, 0, 3])).product == 6
    circ = lmat([{0: 2, 1: -1, -1: -1}]).push(level(3))
    ld = log_det_prime(circ)
    assert ld.product == 9 and ld.kernel_dim == 1
    assert log_det_prime(QMatrix.identity(5)).product == 1


def test_log_det_prime_matches_numpy():
    for m in (4, 5, 8):
        lap = lmat([{0: 2, 1: -1, -1: -1}]).push(level(m))
        ev = np.linalg.eigvalsh(np.array(lap.to_dense(), dtype=float))
        want = np.prod(ev[ev > 1e-9])
        assert float(log_det_prime(lap).product) == pytest.approx(want)
        # the circle Laplacian mod m has Det' = m^2 (matrix-tree count times m)
        assert log_det_prime(lap).product == m * m


def test_log_det_prime_rejects_indefinite():
    with pytest.raises(ValueError):
        log_det_prime(QMatrix.diag([1, -1]))


def test_small_eigenvalue_circle_m16():
    c = circle_complex(Z)
    lv = level(16)
    reps = small_eigenvalue_reports(c, 0, lv, [Fraction(1, 10)])
    count = sum(1 for j in range(16) if 0 < 2 - 2 * math.cos(2 * math.pi * j / 16) <= 0.1 + 1e-12)
    assert reps[0].lhs == Fraction(count, 16)
    assert reps[0].rhs == pytest.approx(math.log(4) / math.log(10))
    assert reps[0].ok


def test_small_eigenvalue_empty_count_and_k1():
    reps = check_small_eigenvalue_bound(QMatrix.identity(3), 1, 1, [Fraction(1, 2)], 3)
    assert reps[0].lhs == 0 and reps[0].rhs == 0 and reps[0].ok


def test_small_eigenvalue_rejects_non_integral():
    with pytest.raises(ValueError):
        check_small_eigenvalue_bound(QMatrix.diag([Fraction(1, 2)]), 1, 1, [Fraction(1, 2)], 1)


def test_replay_examples():
    assert replay_spec_control(zero_complex(Z, 1), level(4), Fraction(1, 4)).lhs == 0
    rep = replay_spec_control(circle_complex(Z), level(8), Fraction(1, 4))
    assert rep.ok and rep.lhs >= 0
    # frozen against eigenvalues 2 - 2cos(2 pi j / 8) with p(x) = (1 - x^2/16)^d
    d = build_p_eps(Fraction(1, 4), 4).params["d"]
    ev = [2 - 2 * math.cos(2 * math.pi * j / 8) for j in range(8)]
    approx = (sum((1 - x * x / 16) ** d for x in ev) - 1) / 8
    assert float(rep.lhs) == pytest.approx(approx, rel=1e-9)
    s = from_form(lmat([{0: 2, 1: 1, -1: 1}]))
    assert replay_spec_control(s, level(5), Fraction(1, 3)).lhs == 0


def test_report_json():
    rep = check_small_eigenvalue_bound(QMatrix.identity(2), 1, 4, [Fraction(1, 10)], 2)[0]
    d = rep.to_json()
    assert d["lhs"] == "0" and d["ok"] is True and d["eps"] == "1/10"


def test_laplacian_at_is_psd():
    lap = laplacian_at(circle_complex(Z), 1, level(6))
    assert lap.is_symmetric()
    assert min(np.linalg.eigvalsh(np.array(lap.to_dense(), dtype=float))) > -1e-9

"""Polynomial spectral filters, the small-eigenvalue inequality for integral
Laplacians, and numerical replays of the spectral estimates.

Filters are diagnostics only; signatures and Betti numbers elsewhere are
computed from exact kernels and inertia.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

from .chain import FreeComplex, SymmetricComplex
from .linalg import QMatrix, as_rational, charpoly, det_symmetric, format_rational, inertia, nullspace
from .quotient import InvariantViolation, laplacian_at, spectral_count

EXACT_DEGREE_CAP = 512
Q_DEGREE_CAP = 1 << 13


class FilterError(ValueError):
    """A filter could not be built or failed its constraint check."""


@dataclass
class Report:
    name: str
    lhs: Rational
    rhs: float
    ok: bool
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "name": self.name,
            "lhs": format_rational(self.lhs),
            "lhs_decimal": float(self.lhs),
            "rhs_decimal": self.rhs,
            "ok": self.ok,
        }
        out.update(self.details)
        return out


# ---------------------------------------------------------------------------
# filters


def _binom_poly_pow(base: Sequence[Rational], d: int) -> list[Rational]:
    out: list[Rational] = [1]
    for _ in range(d):
        nxt = [0] * (len(out) + len(base) - 1)
        for i, a in enumerate(out):
            if a:
                for j, b in enumerate(base):
                    nxt[i + j] += a * b
        out = [as_rational(c) for c in nxt]
    return out


def _grid_points(eps: Fraction, lo: Fraction, hi: Fraction, extra: Iterable = ()) -> list[Fraction]:
    step = eps / 8
    n = math.ceil((hi - lo) / step)
    pts = {lo + (hi - lo) * Fraction(i, n) for i in range(n + 1)}
    pts.update(Fraction(x) for x in extra if lo <= x <= hi)
    return sorted(pts)


@dataclass
class FilterSpec:
    """A certified polynomial filter on ``[-K, K]``.

    ``degree`` is the polynomial degree in ``x``.  Exact evaluation is
    available for every rational point; ``coefficients()`` expands the
    polynomial and is only sensible for moderate degrees.
    """

    kind: str
    eps: Fraction
    K: Fraction
    degree: int
    interval: tuple[Fraction, Fraction] | None = None
    params: dict = field(default_factory=dict)
    check: dict = field(default_factory=dict)

    # -- p_eps: (1 - (x/K)^2)^d ; q_eps: h(((x - c)/R)^2) - eps/2

    def _y(self, x):
        if self.kind == "p_eps":
            return 1 - (x / self.K) ** 2
        c, r = self.params["center"], self.params["radius"]
        return ((x - c) / r) ** 2

    def __call__(self, x) -> Fraction:
        x = Fraction(x)
        if self.kind == "p_eps":
            return self._y(x) ** self.params["d"]
        return _bernstein_cdf(self._y(x), self.params["N"], self.params["J"]) - self.eps / 2

    def evaluate_float(self, x: float) -> float:
        if self.kind == "p_eps":
            y = 1 - (x / float(self.K)) ** 2
            if y <= 0:
                return 0.0 if y == 0 else float("nan")
            return math.exp(self.params["d"] * math.log(y))
        c, r = float(self.params["center"]), float(self.params["radius"])
        return _bernstein_cdf_float(((x - c) / r) ** 2, self.params["N"], self.params["J"]) - float(self.eps) / 2

    def coefficients(self) -> list[Rational]:
        """Ascending coefficients in ``x``."""
        if self.degree > 4 * EXACT_DEGREE_CAP:
            raise FilterError(f"degree {self.degree} too large to expand")
        if self.kind == "p_eps":
            return _binom_poly_pow([1, 0, -1 / self.K**2], self.params["d"])
        c, r, n, j = self.params["center"], self.params["radius"], self.params["N"], self.params["J"]
        y = [c * c / r**2, -2 * c / r**2, 1 / r**2]
        one_minus_y = [1 - y[0], -y[1], -y[2]]
        total = [Fraction(0)] * (2 * n + 1)
        for i in range(j + 1):
            term = _mul(_binom_poly_pow(y, i), _binom_poly_pow(one_minus_y, n - i))
            for e, v in enumerate(term):
                total[e] += math.comb(n, i) * v
        total[0] -= self.eps / 2
        return [as_rational(v) for v in total]

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "eps": format_rational(self.eps),
            "K": format_rational(self.K),
            "degree": self.degree,
            "interval": [format_rational(v) for v in self.interval] if self.interval else None,
            "params": {k: format_rational(v) if isinstance(v, Fraction) else v for k, v in self.params.items()},
            "check": self.check,
        }


def _mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _bernstein_cdf(y: Fraction, n: int, j: int) -> Fraction:
    """``P(Binomial(n, y) <= j)``, exactly."""
    if y <= 0:
        return Fraction(1)
    if y >= 1:
        return Fraction(1) if j >= n else Fraction(0)
    z = 1 - y
    return sum((math.comb(n, i) * y**i * z ** (n - i) for i in range(j + 1)), Fraction(0))


def _bernstein_cdf_float(y: float, n: int, j: int) -> float:
    if y <= 0:
        return 1.0
    if y >= 1:
        return 1.0 if j >= n else 0.0
    ly, lz = math.log(y), math.log1p(-y)
    return math.fsum(
        math.exp(math.lgamma(n + 1) - math.lgamma(i + 1) - math.lgamma(n - i + 1) + i * ly + (n - i) * lz)
        for i in range(j + 1)
    )


def _p_degree(eps: Fraction, K: Fraction) -> int:
    b = 1 - (eps / K) ** 2
    d = max(1, math.ceil(math.log(float(eps)) / math.log1p(-float((eps / K) ** 2))) - 1)
    if d <= EXACT_DEGREE_CAP:
        # walk to the exact minimum
        while d > 1 and b ** (d - 1) <= eps:
            d -= 1
        while b**d > eps:
            d += 1
        return d
    # float regime: step away from a borderline tie
    while d * math.log(float(b)) > math.log(float(eps)) - 1e-12:
        d += 1
    return d


def build_p_eps(eps, K) -> FilterSpec:
    """``p(x) = (1 - (x/K)^2)^d`` with ``d`` minimal such that ``p(eps) <= eps``.

    The function is 1 at 0, even, decreasing in ``|x|`` and vanishes at
    ``+-K``.  The constraints are checked on a grid of step ``eps/8``;
    exactly when ``d <= EXACT_DEGREE_CAP``, otherwise in floating point
    with the exact monotonicity argument covering the grid gaps.
    """
    eps, K = Fraction(eps), Fraction(K)
    if not 0 < eps < 1:
        raise FilterError(f"eps must lie in (0, 1), got {eps}")
    if K < 1:
        raise FilterError(f"K must be >= 1, got {K}")
    d = _p_degree(eps, K)
    spec = FilterSpec("p_eps", eps, K, 2 * d, params={"d": d})
    spec.check = _check_p(spec)
    if not spec.check["ok"]:
        raise FilterError(f"p_eps failed its constraint check: {spec.check}")
    return spec


def _check_p(spec: FilterSpec) -> dict:
    eps, K = spec.eps, spec.K
    exact = spec.params["d"] <= EXACT_DEGREE_CAP
    pts = _grid_points(eps, -K, K, (0, eps, -eps, K, -K))
    bad = []
    for x in pts:
        v = spec(x) if exact else spec.evaluate_float(float(x))
        slack = 0 if exact else 1e-12
        if abs(x) <= eps:
            ok = -slack <= v <= 1 + eps + slack
        else:
            ok = -slack <= v <= eps + slack
        if not ok:
            bad.append(format_rational(x))
    if spec(0) != 1:
        bad.append("0")
    return {"ok": not bad, "points": len(pts), "exact": exact, "violations": bad[:10]}


def build_q_eps(a, b, eps, K) -> FilterSpec:
    """Polynomial ``q`` with ``-1 <= q <= chi_(a,b)`` on ``[-K, K]`` and
    ``q >= chi_(a,b) - eps`` off the two ``eps``-collars inside ``(a, b)``.

    ``q(x) = h(y) - eps/2`` with ``y = ((x - c)/R)^2`` and ``h`` the
    Bernstein polynomial ``P(Bin(N, y) <= J)``, a decreasing function of
    ``y`` taking values in ``[0, 1]``.  It suffices that ``h(y1) >= 1 -
    eps/2`` at the inner collar and ``h(y2) <= eps/2`` at the interval
    ends; ``N`` starts from the Hoeffding estimate and doubles until these
    two exact checks pass.
    """
    a, b, eps, K = Fraction(a), Fraction(b), Fraction(eps), Fraction(K)
    if not a < b:
        raise FilterError("need a < b")
    if not 0 < eps < (b - a) / 2:
        raise FilterError(f"need 0 < eps < (b - a)/2, got eps={eps}")
    if K < max(abs(a), abs(b), 1):
        raise FilterError("need K >= max(|a|, |b|, 1)")
    c, w = (a + b) / 2, (b - a) / 2
    r = K + abs(c)
    y1, y2 = ((w - eps) / r) ** 2, (w / r) ** 2
    theta = (y1 + y2) / 2
    gap = y2 - y1
    n = max(4, int(2 * math.log(2 / float(eps)) / float(gap) ** 2 / 8))
    while True:
        if n > Q_DEGREE_CAP:
            raise FilterError(f"q_eps needs Bernstein degree above {Q_DEGREE_CAP}")
        j = math.floor(theta * n)
        if _bernstein_cdf(y1, n, j) >= 1 - eps / 2 and _bernstein_cdf(y2, n, j) <= eps / 2:
            break
        n *= 2
    spec = FilterSpec(
        "q_eps", eps, K, 2 * n, interval=(a, b), params={"center": c, "radius": r, "N": n, "J": j}
    )
    spec.check = _check_q(spec)
    if not spec.check["ok"]:
        raise FilterError(f"q_eps failed its constraint check: {spec.check}")
    return spec


def _check_q(spec: FilterSpec) -> dict:
    a, b = spec.interval
    eps, K = spec.eps, spec.K
    exact = spec.params["N"] <= 64
    pts = _grid_points(eps, -K, K, (a, b, a + eps, b - eps, (a + b) / 2))
    bad = []
    slack = 0 if exact else 1e-9
    for x in pts:
        v = spec(x) if exact else spec.evaluate_float(float(x))
        chi = 1 if a < x < b else 0
        ok = -1 - slack <= v <= chi + slack
        if x <= a or x >= b or a + eps <= x <= b - eps:
            ok = ok and v >= chi - eps - slack
        if not ok:
            bad.append(format_rational(x))
    return {"ok": not bad, "points": len(pts), "exact": exact, "violations": bad[:10]}


# ---------------------------------------------------------------------------
# determinants and small eigenvalues


@dataclass
class LogDet:
    product: Rational
    log: float
    kernel_dim: int

    def to_json(self) -> dict:
        return {"product": format_rational(self.product), "log": self.log, "kernel_dim": self.kernel_dim}


def log_det_prime(delta: QMatrix, cross_check: bool = True) -> LogDet:
    """Product of the non-zero eigenvalues of a PSD rational matrix.

    Read off the characteristic polynomial: with ``c_z`` the lowest
    non-zero coefficient the product is ``(-1)^(n - z) c_z``.  With
    ``cross_check`` the value is recomputed as ``det(delta + P)`` for the
    orthogonal projection ``P`` onto the kernel.
    """
    if not delta.is_symmetric():
        raise ValueError("log_det_prime needs a symmetric matrix")
    ine = inertia(delta)
    if ine.negative:
        raise ValueError(f"matrix is not positive semidefinite (inertia {tuple(ine)})")
    n = delta.nrows
    coeffs = charpoly(delta)
    z = next(i for i, c in enumerate(coeffs) if c != 0)
    if z != ine.zero:
        raise InvariantViolation("kernel dimension disagrees between inertia and characteristic polynomial")
    prod = as_rational((-1) ** (n - z) * coeffs[z])
    if cross_check and n:
        basis = nullspace(delta)
        if basis.ncols:
            gram = basis.T @ basis
            gram_inv = _inverse(gram)
            proj = basis @ gram_inv @ basis.T
        else:
            proj = QMatrix.zeros(n, n)
        if det_symmetric(delta + proj) != prod:
            raise InvariantViolation("det(delta + P_ker) differs from the characteristic polynomial value")
    return LogDet(prod, math.log(prod) if prod > 0 else float("nan"), z)


def _inverse(m: QMatrix) -> QMatrix:
    n = m.nrows
    a = [[Fraction(v) for v in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m.to_dense())]
    for col in range(n):
        piv = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [v * inv for v in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return QMatrix.from_dense([row[n:] for row in a])


def check_small_eigenvalue_bound(
    delta_k: QMatrix, d: int, K, eps_grid: Sequence, index: int, integral: bool = True
) -> list[Report]:
    """``#{eigenvalues in (0, eps]} / index <= d ln K / (-ln eps)`` for each ``eps``.

    ``delta_k`` must come from an integral group ring Laplacian with ``d``
    rows whose operator norm is at most ``K``.
    """
    if not integral or not delta_k.is_integral():
        raise ValueError("the small-eigenvalue bound needs an integral Laplacian")
    K = max(Fraction(1), Fraction(K))
    out = []
    for eps in eps_grid:
        eps = Fraction(eps)
        if not 0 < eps < 1:
            raise ValueError(f"eps must lie in (0, 1), got {eps}")
        lhs = Fraction(spectral_count(delta_k, 0, eps), index)
        rhs = d * math.log(K) / -math.log(eps)
        out.append(
            Report(
                "small_eigenvalues",
                lhs,
                rhs,
                float(lhs) <= rhs + 1e-12,
                {"eps": format_rational(eps), "d": d, "K": format_rational(K), "index": index},
            )
        )
    return out


def laplacian_norm_bound(c: FreeComplex, p: int) -> Rational:
    """Upper bound for the operator norm of ``Delta_p`` on every quotient."""
    return max(1, c.laplacian(p).norm_bound())


def small_eigenvalue_reports(c: FreeComplex, p: int, level, eps_grid: Sequence) -> list[Report]:
    lap = c.laplacian(p)
    if not lap.is_integral():
        raise ValueError("the small-eigenvalue bound needs an integral Laplacian")
    return check_small_eigenvalue_bound(
        laplacian_at(c, p, level), lap.nrows, laplacian_norm_bound(c, p), eps_grid, level.order
    )


# ---------------------------------------------------------------------------
# proof replay


def _matrix_power(m: QMatrix, e: int) -> QMatrix:
    out = QMatrix.identity(m.nrows)
    base = m
    while e:
        if e & 1:
            out = out @ base
        e >>= 1
        if e:
            base = base @ base
    return out


def replay_spec_control(s: SymmetricComplex | FreeComplex, level, eps, degree: int | None = None) -> Report:
    """Exact ``tr_k |p_eps(Delta[k]) - pr[k]|`` against ``C eps + C/(-ln eps)``.

    Since ``p_eps(0) = 1`` and ``p_eps >= 0`` on the spectrum, the operator
    is PSD and its normalized trace is ``(tr p_eps(Delta) - dim ker)/index``.
    ``C`` is ``2 d max(1, ln K)`` with ``d`` the rank and ``K`` the norm
    bound of the Laplacian: the eigenvalues in ``(0, eps]`` contribute at
    most ``(1 + eps)`` times the small-eigenvalue bound and the rest at
    most ``eps`` each.
    """
    if isinstance(s, SymmetricComplex):
        c, p = s.base, s.middle
    else:
        c, p = s, degree if degree is not None else 0
    if degree is not None:
        p = degree
    K = Fraction(laplacian_norm_bound(c, p))
    filt = build_p_eps(eps, K)
    delta = laplacian_at(c, p, level)
    n = delta.nrows
    if filt.params["d"] > 4096:
        raise ValueError("filter degree too large for exact replay")
    b = QMatrix.identity(n) - (delta @ delta).scale(Fraction(1) / K**2)
    tr_p = _matrix_power(b, filt.params["d"]).trace()
    ker = n - _rank_psd(delta)
    lhs = Fraction(tr_p - ker, level.order)
    if lhs < 0:
        raise InvariantViolation("negative trace of a PSD operator")
    d = c.rank(p)
    cc = 2 * d * max(1.0, math.log(K))
    e = float(eps)
    rhs = cc * e + cc / -math.log(e)
    return Report(
        "spectral_control",
        lhs,
        rhs,
        float(lhs) <= rhs,
        {"eps": format_rational(Fraction(eps)), "C": cc, "filter_degree": filt.degree, "index": level.order},
    )


def _rank_psd(delta: QMatrix) -> int:
    ine = inertia(delta)
    return ine.positive + ine.negative


__all__ = [
    "FilterError",
    "FilterSpec",
    "Report",
    "LogDet",
    "build_p_eps",
    "build_q_eps",
    "log_det_prime",
    "check_small_eigenvalue_bound",
    "small_eigenvalue_reports",
    "laplacian_norm_bound",
    "replay_spec_control",
]

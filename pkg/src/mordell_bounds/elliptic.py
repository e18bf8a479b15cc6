"""Exact arithmetic on y^2 = x^3 + Ax + B over the rationals.

Points are plain tuples ``(x, y)`` of ``gmpy2.mpq``; the point at infinity is
``None``.  Coefficients of the model must be rational integers.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import gmpy2
import sympy
from gmpy2 import mpq, mpz

from ._arith import to_mpq, weil_height_rational
from .errors import InvalidInputError, SingularCurveError

IDENTITY = None

# Mazur: rational torsion has order at most 12.
MAX_TORSION_ORDER = 12


@dataclass(frozen=True)
class EllipticCurveQ:
    """Integral short Weierstrass model with its discriminant, j-invariant and C(E)."""

    A: int
    B: int
    disc: int = field(init=False)
    j: mpq = field(init=False, compare=False)
    C_E: float = field(init=False, compare=False)

    def __post_init__(self):
        for name in ("A", "B"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, type(mpz()))):
                raise InvalidInputError(
                    f"{name} must be an integer; rescale x -> x/u^2, y -> y/u^3 to get an integral model"
                )
            object.__setattr__(self, name, int(value))
        disc = -16 * (4 * self.A**3 + 27 * self.B**2)
        if disc == 0:
            raise SingularCurveError(f"y^2 = x^3 + {self.A}x + {self.B} is singular")
        j = mpq(-1728 * (4 * self.A) ** 3, disc)
        c_e = (
            (weil_height_rational(disc) + 3 * weil_height_rational(j)) / 4
            + (weil_height_rational(self.A) + weil_height_rational(self.B)) / 2
            + 4
        )
        object.__setattr__(self, "disc", disc)
        object.__setattr__(self, "j", j)
        object.__setattr__(self, "C_E", c_e)

    def __str__(self):
        return f"y^2 = x^3 + ({self.A})x + ({self.B})"


def curve_invariants(A, B) -> EllipticCurveQ:
    return EllipticCurveQ(A, B)


def make_point(E: EllipticCurveQ, x, y):
    """Build an affine point, raising if it is not on ``E``."""
    P = (to_mpq(x), to_mpq(y))
    if not on_curve(E, P):
        raise InvalidInputError(f"({x}, {y}) is not on {E}")
    return P


def on_curve(E: EllipticCurveQ, P) -> bool:
    if P is None:
        return True
    x, y = P
    return y * y == x * x * x + E.A * x + E.B


def _check(E, *points):
    for P in points:
        if P is not None and (len(P) != 2 or not on_curve(E, P)):
            raise InvalidInputError(f"{P} is not a point of {E}")


def neg(E: EllipticCurveQ, P):
    _check(E, P)
    if P is None:
        return None
    return (P[0], -P[1])


def _add(E, P, Q):
    if P is None:
        return Q
    if Q is None:
        return P
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        if y1 != y2 or y1 == 0:
            return None
        lam = (3 * x1 * x1 + E.A) / (2 * y1)
    else:
        lam = (y2 - y1) / (x2 - x1)
    x3 = lam * lam - x1 - x2
    return (x3, lam * (x1 - x3) - y1)


def add_points(E: EllipticCurveQ, P, Q):
    """Chord-tangent sum of two points."""
    _check(E, P, Q)
    return _add(E, P, Q)


def _mul(E, n, P):
    if n < 0:
        n, P = -n, (None if P is None else (P[0], -P[1]))
    result = None
    addend = P
    while n:
        if n & 1:
            result = _add(E, result, addend)
        n >>= 1
        if n:
            addend = _add(E, addend, addend)
    return result


def scalar_mul(E: EllipticCurveQ, n: int, P):
    """[n]P by double-and-add."""
    _check(E, P)
    return _mul(E, int(n), P)


def point_order(E: EllipticCurveQ, P, bound: int = MAX_TORSION_ORDER):
    """Order of ``P`` if it is at most ``bound``, else ``None``."""
    _check(E, P)
    Q = P
    for k in range(1, bound + 1):
        if Q is None:
            return k
        Q = _add(E, Q, P)
    return None


def is_torsion(E: EllipticCurveQ, P) -> bool:
    return point_order(E, P) is not None


def _integer_roots_small(coeffs):
    """Integer roots of an integer polynomial given low-to-high coefficients."""
    coeffs = [int(c) for c in coeffs]
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    roots = set()
    if coeffs and coeffs[0] == 0:
        roots.add(0)
        k = 0
        while coeffs[k] == 0:
            k += 1
        coeffs = coeffs[k:]
    if len(coeffs) <= 1:
        return roots
    for d in sympy.divisors(abs(coeffs[0])):
        for c in (d, -d):
            if sum(a * c**i for i, a in enumerate(coeffs)) == 0:
                roots.add(c)
    return roots


def torsion_subgroup(E: EllipticCurveQ) -> list:
    """All rational torsion points, found by a Lutz-Nagell sweep.

    Candidates are integral points with y = 0 or y^2 | disc; each is kept only
    if its order is at most 12.  The identity comes first, the rest are sorted.
    """
    factors = sympy.factorint(abs(E.disc))
    ys = [0]
    for exps in product(*[range(e // 2 + 1) for e in factors.values()]):
        y = 1
        for p, e in zip(factors, exps):
            y *= p**e
        ys.append(y)
    points = []
    for y in sorted(set(ys)):
        for x in _integer_roots_small([E.B - y * y, E.A, 0, 1]):
            for s in ((1,) if y == 0 else (1, -1)):
                P = (mpq(x), mpq(s * y))
                if point_order(E, P) is None:
                    # passes Lutz-Nagell but has infinite order
                    continue
                points.append(P)
    points.sort(key=lambda P: (P[0], P[1]))
    return [None] + points


# ---------------------------------------------------------------------------
# division polynomials and the degree of multiplication maps


@lru_cache(maxsize=None)
def _division_polynomials(n_max: int, A=None, B=None):
    """psi_0..psi_{n_max} in Z[A, B, x, y] reduced mod y^2 = x^3 + Ax + B."""
    x, y = sympy.symbols("x y")
    a = sympy.Symbol("A") if A is None else sympy.Integer(A)
    b = sympy.Symbol("B") if B is None else sympy.Integer(B)
    f = x**3 + a * x + b

    def red(expr):
        expr = sympy.expand(expr)
        poly = sympy.Poly(expr, y)
        out = 0
        for (k,), c in poly.terms():
            out += c * f ** (k // 2) * y ** (k % 2)
        return sympy.expand(out)

    psi = [sympy.Integer(0), sympy.Integer(1), 2 * y,
           3 * x**4 + 6 * a * x**2 + 12 * b * x - a**2,
           4 * y * (x**6 + 5 * a * x**4 + 20 * b * x**3 - 5 * a**2 * x**2 - 4 * a * b * x - 8 * b**2 - a**3)]
    for n in range(5, n_max + 1):
        m = n // 2
        if n % 2:
            val = psi[m + 2] * psi[m] ** 3 - psi[m - 1] * psi[m + 1] ** 3
        else:
            val = psi[m] * (psi[m + 2] * psi[m - 1] ** 2 - psi[m - 2] * psi[m + 1] ** 2)
            val = red(val)
            # val / 2y; when val is free of y this is y * val / (2f)
            val = sympy.cancel(val / (2 * y)) if val.has(y) else y * sympy.cancel(val / (2 * f))
        psi.append(red(val))
    return tuple(psi), x, y, f


def x_multiplication_map(n: int, E: EllipticCurveQ | None = None):
    """x([n]P) = num(x)/den(x) as coprime sympy polynomials in x.

    Uses x([n]P) = x - psi_{n-1} psi_{n+1} / psi_n^2.  With ``E = None`` the
    coefficients live in Z[A, B] (generic curve).
    """
    n = abs(int(n))
    if n == 0:
        raise InvalidInputError("[0] is not a rational map to the affine chart")
    key = (None, None) if E is None else (E.A, E.B)
    psi, x, y, f = _division_polynomials(n + 1, *key)
    num = sympy.expand(x * psi[n] ** 2 - psi[n - 1] * psi[n + 1])
    den = sympy.expand(psi[n] ** 2)
    # both are even in y, so y^2 -> f leaves polynomials in x
    num = sympy.expand(num.subs(y**2, f)) if num.has(y) else num
    den = sympy.expand(den.subs(y**2, f)) if den.has(y) else den
    num_p = sympy.Poly(_eliminate_y(num, y, f), x)
    den_p = sympy.Poly(_eliminate_y(den, y, f), x)
    g = sympy.gcd(num_p, den_p)
    if g.degree() > 0:
        num_p = sympy.div(num_p, g)[0]
        den_p = sympy.div(den_p, g)[0]
    return num_p, den_p


def _eliminate_y(expr, y, f):
    poly = sympy.Poly(sympy.expand(expr), y)
    out = 0
    for (k,), c in poly.terms():
        if k % 2:
            raise AssertionError("odd power of y in an x-coordinate map")
        out += c * f ** (k // 2)
    return sympy.expand(out)


def mult_degree_bounds(alpha, order=None, E: EllipticCurveQ | None = None):
    """Degree window (|alpha|^2, 2|alpha|^2) for the map P -> alpha P.

    ``alpha`` is an ``(a, b)`` pair meaning a + b*tau in ``order`` (``None``
    means End(E) = Z).  For a rational integer n with |n| <= 5 the third
    return value records whether the numerator of x([n]P) has degree exactly
    n^2, computed from division polynomials (generic A, B, and also on ``E``
    when given).  Otherwise the third value is ``None``.
    """
    from .cm_lattice import CMOrder, end_norm

    if isinstance(alpha, int):
        alpha = (alpha, 0)
    order = order if order is not None else CMOrder(None)
    norm = end_norm(alpha, order)
    if norm == 0:
        raise InvalidInputError("alpha must be nonzero")
    verified = None
    a, b = alpha
    if b == 0 and abs(a) <= 5:
        n = abs(int(a))
        checks = [x_multiplication_map(n)]
        if E is not None:
            checks.append(x_multiplication_map(n, E))
        verified = all(num.degree() == n * n and den.degree() == n * n - 1 for num, den in checks)
    return int(norm), 2 * int(norm), verified


def _int_cubic_roots(a: int, b: int) -> list:
    """Integer roots of X^3 + aX + b, by bisection on monotone pieces."""

    def f(X):
        return X * X * X + a * X + b

    bound = 1 + max(abs(a), abs(b))
    cuts = [-bound - 1, bound + 1]
    if a < 0:
        # critical points at +-sqrt(-a/3); integer brackets around them
        c = int(gmpy2.isqrt(-a // 3 + 1)) + 1
        cuts = [-bound - 1, -c, c, bound + 1]
    roots = set()
    for lo, hi in zip(cuts, cuts[1:]):
        flo, fhi = f(lo), f(hi)
        for X in (lo, hi):
            if f(X) == 0:
                roots.add(X)
        if (flo < 0) == (fhi < 0) or flo == 0 or fhi == 0:
            # no sign change; on the middle piece scan the short window by hand
            if hi - lo <= 64:
                roots.update(X for X in range(lo, hi + 1) if f(X) == 0)
            continue
        inc = fhi > flo
        while hi - lo > 1:
            mid = (lo + hi) // 2
            fm = f(mid)
            if fm == 0:
                lo = hi = mid
                break
            if (fm < 0) == inc:
                lo = mid
            else:
                hi = mid
        for X in (lo, hi):
            if f(X) == 0:
                roots.add(X)
    if a < 0:
        c = int(gmpy2.isqrt(-a // 3 + 1)) + 1
        if 2 * c + 1 <= 10**6:
            roots.update(X for X in range(-c, c + 1) if f(X) == 0)
    return sorted(roots)


def lift_x_from_y(E: EllipticCurveQ, y0) -> list:
    """All rational x with x^3 + Ax + B = y0^2, in increasing order.

    On an integral model a rational point has x = X/d^2, y = Y/d^3, so the
    denominator of y0 must be a cube d^3; X is then an integer root of
    X^3 + A d^4 X + B d^6 - Y^2.
    """
    y0 = to_mpq(y0)
    u, v = int(y0.numerator), int(y0.denominator)
    d, exact = gmpy2.iroot(mpz(v), 3)
    if not exact:
        return []
    d = int(d)
    d2 = d * d
    roots = _int_cubic_roots(E.A * d2 * d2, E.B * d2 * d2 * d2 - u * u)
    return [mpq(X, d2) for X in roots]

"""Projective heights over Q and the canonical height on E.

All heights are natural logarithms.  The canonical height is normalized as the
duplication limit of h2 on the embedding (x : y : 1), which is 3/2 times the
limit of 4^-n h(x(2^n P)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import gmpy2
import mpmath
import sympy
from gmpy2 import mpq, mpz

from ._arith import log_int, primitive_integer_vector, to_mpq
from .elliptic import EllipticCurveQ, _mul, _check, point_order
from .errors import InvalidInputError

MAX_DOUBLINGS = 64
DEFAULT_EPS = 1e-9


@dataclass(frozen=True)
class ProjPoint:
    coords: tuple

    def __init__(self, coords):
        qs = tuple(to_mpq(c) for c in coords)
        if not qs or all(q == 0 for q in qs):
            raise InvalidInputError("projective point needs a nonzero coordinate")
        object.__setattr__(self, "coords", qs)

    def primitive(self) -> list:
        return primitive_integer_vector(self.coords)


@dataclass(frozen=True)
class HeightValue:
    value: float
    abs_error: float = 0.0

    def __float__(self):
        return float(self.value)


def _as_proj(p) -> ProjPoint:
    return p if isinstance(p, ProjPoint) else ProjPoint(p)


def weil_height(p) -> HeightValue:
    """h_W(P): log of the largest entry of the primitive integer representative."""
    ints = _as_proj(p).primitive()
    value = log_int(max(abs(v) for v in ints))
    return HeightValue(value, 1e-12 * max(value, 1.0))


def h2_height(p) -> HeightValue:
    """Height with the l2 norm at the archimedean place."""
    ints = _as_proj(p).primitive()
    sq = sum(int(v) * int(v) for v in ints)
    value = 0.5 * log_int(sq)
    return HeightValue(value, 1e-12 * max(value, 1.0))


def point_embedding(P) -> ProjPoint:
    """iota(P) = (x : y : 1), and (0 : 1 : 0) for the identity."""
    if P is None:
        return ProjPoint((0, 1, 0))
    return ProjPoint((P[0], P[1], 1))


# ---------------------------------------------------------------------------
# canonical height by local decomposition of the x-coordinate height
#
# With x = X/Z primitive, x(2Q) = F(X,Z)/G(X,Z) where
#   F = X^4 - 2A X^2 Z^2 - 8B X Z^3 + A^2 Z^4,  G = 4Z(X^3 + A X Z^2 + B Z^3).
# h_x(2Q) - 4 h_x(Q) splits into local terms mu_v(Q); at a prime p only the
# common p-power of F and G contributes, and it divides Res(F, G).


def _F(A, B, X, Z):
    X2, Z2 = X * X, Z * Z
    return X2 * X2 - 2 * A * X2 * Z2 - 8 * B * X * Z2 * Z + A * A * Z2 * Z2


def _G(A, B, X, Z):
    return 4 * Z * (X * X * X + A * X * Z * Z + B * Z * Z * Z)


@lru_cache(maxsize=256)
def _resultant_valuations(A: int, B: int) -> tuple:
    X = sympy.Symbol("X")
    res = sympy.resultant(sympy.Poly(_F(A, B, X, 1), X), sympy.Poly(_G(A, B, X, 1), X))
    # G has degree 3 in X after dehomogenizing; the missing top coefficient of the
    # homogeneous resultant is a unit (F is monic), so this is Res(F, G) up to sign.
    res = abs(int(res))
    return tuple(sorted(sympy.factorint(res).items()))


def _x_height(x: mpq) -> float:
    return log_int(max(abs(int(x.numerator)), int(x.denominator), 1))


def _terms_needed(E: EllipticCurveQ, eps: float) -> int:
    defect = 12.0 * E.C_E
    k = math.ceil(math.log((4.0 / 3.0) * defect / eps, 4)) + 2
    return max(k, 4)


def _padic_sum(A, B, x: mpq, p: int, vres: int, K: int) -> float:
    """sum_k 4^-(k+1) mu_p(2^k P), exact in valuations."""
    M = K * vres + 20
    mod = mpz(p) ** M
    X, Z = mpz(x.numerator), mpz(x.denominator)
    # primitive pair: one of X, Z is a p-adic unit
    total = 0.0
    for k in range(K):
        FX = _F(A, B, X, Z) % mod
        GX = _G(A, B, X, Z) % mod
        e = min(_val(FX, p, M), _val(GX, p, M))
        if e > vres:
            raise AssertionError("p-adic precision exhausted")
        total -= e * math.log(p) / 4 ** (k + 1)
        pe = mpz(p) ** e
        X, Z = FX // pe, GX // pe
        mod //= pe
        M -= e
        X, Z = X % mod, Z % mod
    return total


def _val(n, p, cap):
    if n == 0:
        return cap
    return int(gmpy2.remove(mpz(n), p)[1])


def _arch_sum(A, B, x: mpq, K: int) -> float:
    with mpmath.workdps(60):
        X, Z = mpmath.mpf(int(x.numerator)), mpmath.mpf(int(x.denominator))
        s = max(abs(X), abs(Z))
        X, Z = X / s, Z / s
        total = mpmath.mpf(0)
        for k in range(K):
            FX, GX = _F(A, B, X, Z), _G(A, B, X, Z)
            s = max(abs(FX), abs(GX))
            total += mpmath.log(s) / mpmath.mpf(4) ** (k + 1)
            X, Z = FX / s, GX / s
        return float(total)


def canonical_height(E: EllipticCurveQ, P, eps: float = DEFAULT_EPS) -> HeightValue:
    """Canonical height lim 4^-n h2(iota(2^n P)), to within ``eps``.

    The limit is assembled place by place from the doubling formulas, so no
    big multiple of P is ever formed; the truncated tail is at most
    (4/3) 4^-K times the per-step defect.
    """
    _check(E, P)
    if not eps > 0:
        raise InvalidInputError("eps must be positive")
    if P is None or point_order(E, P) is not None:
        return HeightValue(0.0, 0.0)
    K = _terms_needed(E, eps)
    if K > MAX_DOUBLINGS:
        raise InvalidInputError(f"eps={eps} needs {K} doublings (cap {MAX_DOUBLINGS})")
    x = P[0]
    hx = _x_height(x) + _arch_sum(E.A, E.B, x, K)
    for p, vres in _resultant_valuations(E.A, E.B):
        hx += _padic_sum(E.A, E.B, x, p, vres, K)
    tail = (4.0 / 3.0) * 12.0 * E.C_E / 4.0**K
    value = 1.5 * hx
    return HeightValue(max(value, 0.0), 1.5 * tail + 1e-14 * abs(value))


def doubling_height(E: EllipticCurveQ, P, n: int) -> HeightValue:
    """4^-n h2(iota(2^n P)) by exact doubling; slow, used as an oracle.

    abs_error is the geometric tail C(E)(4/3)4^-n of the height comparison.
    """
    _check(E, P)
    Q = _mul(E, 2**n, P)
    value = h2_height(point_embedding(Q)).value / 4**n
    return HeightValue(value, E.C_E * (4.0 / 3.0) / 4**n)


def height_gap_check(E: EllipticCurveQ, Ps, eps: float = DEFAULT_EPS) -> tuple:
    """Check |h2(P) - hhat(P)| <= N C(E) for a tuple P in E^N.

    h2 of the tuple is the sum of the coordinate heights.  Returns
    ``(holds, {"h2": ..., "hhat": ..., "gap": ..., "allowed": ...})``.
    """
    Ps = tuple(Ps)
    _check(E, *Ps)
    N = len(Ps)
    h2 = sum(h2_height(point_embedding(P)).value for P in Ps)
    hh = [canonical_height(E, P, eps) for P in Ps]
    hhat = sum(h.value for h in hh)
    err = sum(h.abs_error for h in hh)
    gap = abs(h2 - hhat)
    allowed = N * E.C_E
    return gap <= allowed + err, {"h2": h2, "hhat": hhat, "gap": gap, "allowed": allowed}

"""Bounded search for rational points on p(x1) = y2 inside E x E.

Points of E(Q) are written aG + T with G a generator and T torsion.  The
search runs over |a| <= radius on the first factor and |b| <= radius on the
second.  Candidate pairs are matched through residues modulo a few primes
near 2^61 and every survivor is checked with exact rational arithmetic, so the
reported list is sound; filtering can only drop a pair that does not solve
the equation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import gmpy2
import numpy as np
from gmpy2 import mpq

from ._arith import to_mpq
from .bounds import poly_curve_bound
from .cm_lattice import CMOrder
from .elliptic import EllipticCurveQ, _check, lift_x_from_y, on_curve, scalar_mul, add_points, torsion_subgroup
from .errors import InvalidInputError, ResourceLimitError
from .heights import canonical_height

__all__ = [
    "MWInput",
    "SearchReport",
    "subgroup_enumerate",
    "curve_membership",
    "lift_x_from_y",
    "search_rational_points",
    "brute_force_pairs",
]

SAFETY_FACTOR = 3
ENUM_CAP = 20000
FILTER_PRIMES = 3
HHAT_TOL = 1e-9
# torsion_subgroup lists the identity first, so (0, 0) is the one key for O
IDENTITY_KEY = (0, 0)


@dataclass
class MWInput:
    """A claimed Mordell-Weil basis: one generator (or none for rank 0)."""

    E: EllipticCurveQ
    generator: tuple | None
    claimed_rank: int = 1
    torsion: list = field(default_factory=list)
    hhat_G: float = 0.0

    def __post_init__(self):
        if self.claimed_rank not in (0, 1):
            raise InvalidInputError("only rank 0 or rank 1 data is supported")
        if self.claimed_rank == 1:
            if self.generator is None:
                raise InvalidInputError("rank 1 needs a generator")
            G = tuple(to_mpq(c) for c in self.generator)
            _check(self.E, G)
            self.generator = G
            h = canonical_height(self.E, G)
            if h.value <= HHAT_TOL + h.abs_error:
                raise InvalidInputError(f"generator {G} is torsion")
            self.hhat_G = h.value
        else:
            self.generator = None
        self.torsion = torsion_subgroup(self.E)


@dataclass
class SearchReport:
    certified_bound_nats: object
    hhat_G: float
    required_coeff_radius: int
    searched_radius: int
    points_found: list
    fully_certified: bool
    safety_factor: float
    closure_candidates: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    bound_report: object = None


def required_radius(bound, hhat_G: float, safety: float = SAFETY_FACTOR) -> int:
    """ceil(sqrt(bound * safety / hhat(G))), computed in integers after scaling."""
    import mpmath

    with mpmath.workdps(50):
        v = mpmath.sqrt(mpmath.mpf(bound) * safety / mpmath.mpf(hhat_G))
        return int(mpmath.ceil(v))


def subgroup_enumerate(E: EllipticCurveQ, mw: MWInput, hcap: float, cap: int = ENUM_CAP) -> list:
    """All aG + T with a^2 hhat(G) <= hcap, ordered by a and then torsion index."""
    tors = mw.torsion
    if mw.generator is None:
        return list(tors)
    k = math.isqrt(int(hcap / mw.hhat_G)) if hcap >= 0 else -1
    while (k + 1) ** 2 * mw.hhat_G <= hcap:
        k += 1
    while k >= 0 and k * k * mw.hhat_G > hcap:
        k -= 1
    if k < 0:
        return []
    total = (2 * k + 1) * len(tors)
    if total > cap:
        k = (cap // len(tors) - 1) // 2
        part = _multiples_with_torsion(E, mw, k)
        raise ResourceLimitError(f"{total} points exceed the cap {cap}", radius=k, partial=part)
    return _multiples_with_torsion(E, mw, k)


def _multiples_with_torsion(E, mw, k):
    G = mw.generator
    mult = {0: None}
    P = None
    for a in range(1, k + 1):
        P = add_points(E, P, G)
        mult[a] = P
        mult[-a] = None if P is None else (P[0], -P[1])
    out = []
    for a in range(-k, k + 1):
        for T in mw.torsion:
            out.append(add_points(E, mult[a], T))
    return out


def _poly_eval(p, x):
    acc = mpq(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def curve_membership(p, P1, P2) -> bool:
    """Exact test of p(x(P1)) = y(P2); both points must be affine."""
    if P1 is None or P2 is None:
        raise InvalidInputError("not affine: the identity lies on the closure only")
    coeffs = [to_mpq(c) for c in p]
    return _poly_eval(coeffs, to_mpq(P1[0])) == to_mpq(P2[1])


# ---------------------------------------------------------------------------
# modular filter


def _good_primes(E, mw, p, count, start):
    bad = abs(E.disc) * 6
    dens = 1
    for c in p:
        dens = dens * int(to_mpq(c).denominator)
    if mw.generator is not None:
        dens *= int(mw.generator[0].denominator)
    out = []
    q = start
    while len(out) < count:
        q = int(gmpy2.next_prime(q))
        if bad % q and dens % q:
            out.append(q)
    return out


def _red(v, q):
    v = to_mpq(v)
    return int(v.numerator) % q * pow(int(v.denominator), -1, q) % q


def _add_mod(P, Q, A, q):
    if P is None:
        return Q
    if Q is None:
        return P
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        if (y1 + y2) % q == 0:
            return None
        lam = (3 * x1 * x1 + A) * pow(2 * y1, -1, q) % q
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, q) % q
    x3 = (lam * lam - x1 - x2) % q
    return x3, (lam * (x1 - x3) - y1) % q


def _residue_table(E, mw, R, q):
    """Reductions of aG + T for |a| <= R, keyed (a, torsion index)."""
    A = E.A % q
    tors = [None if T is None else (_red(T[0], q), _red(T[1], q)) for T in mw.torsion]
    table = {}
    if mw.generator is None:
        for i, T in enumerate(tors):
            table[(0, i)] = T
        return table
    G = (_red(mw.generator[0], q), _red(mw.generator[1], q))
    P = None
    for a in range(0, R + 1):
        for sgn in ((1,) if a == 0 else (1, -1)):
            base = P if sgn == 1 or P is None else (P[0], -P[1] % q)
            for i, T in enumerate(tors):
                table[(sgn * a, i)] = _add_mod(base, T, A, q)
        P = _add_mod(P, G, A, q)
    return table


def _match_mod(E, mw, p, R, q):
    """Pairs ((a, i), (b, j)) whose reductions satisfy p(x1) = y2 mod q.

    A reduction to the identity is a wildcard, so nothing is lost there.
    """
    table = _residue_table(E, mw, R, q)
    table.pop(IDENTITY_KEY, None)
    pc = [_red(c, q) for c in p]
    by_y = {}
    wild2 = []
    for key, P in table.items():
        if P is None:
            wild2.append(key)
        else:
            by_y.setdefault(P[1], []).append(key)
    out = set()
    for k1, P in table.items():
        if P is None:
            out.update((k1, k2) for k2 in table)
            continue
        v = 0
        for c in reversed(pc):
            v = (v * P[0] + c) % q
        out.update((k1, k2) for k2 in by_y.get(v, ()))
        out.update((k1, k2) for k2 in wild2)
    return out


def _exact_point(E, mw, key, cache):
    if key not in cache:
        a, i = key
        base = None if mw.generator is None else scalar_mul(E, a, mw.generator)
        cache[key] = add_points(E, base, mw.torsion[i])
    return cache[key]


def _verify(E, mw, p, pairs):
    cache = {}
    found = []
    for k1, k2 in sorted(pairs):
        P1 = _exact_point(E, mw, k1, cache)
        P2 = _exact_point(E, mw, k2, cache)
        if P1 is None or P2 is None:
            continue
        if curve_membership(p, P1, P2):
            if not (on_curve(E, P1) and on_curve(E, P2)):
                raise AssertionError("group law left the curve")
            found.append({"a": k1[0], "T1": k1[1], "b": k2[0], "T2": k2[1], "P1": P1, "P2": P2})
    return found


def search_rational_points(E: EllipticCurveQ, order: CMOrder, p, mw: MWInput,
                           radius_cap: int) -> SearchReport:
    """Search p(x1) = y2 over the subgroup and report how much of the bound was covered."""
    if not isinstance(radius_cap, int) or radius_cap <= 0:
        raise InvalidInputError("radius_cap must be a positive integer")
    if mw.E != E:
        raise InvalidInputError("Mordell-Weil data belongs to a different curve")
    p = [to_mpq(c) for c in p]
    rep = poly_curve_bound(E, order, p)
    bound = rep.bound_nats
    warnings = list(rep.warnings)
    if mw.generator is None:
        required = 0
        R = 0
        hh = 0.0
    else:
        hh = mw.hhat_G
        required = required_radius(bound, hh)
        R = min(required, radius_cap)
    primes = _good_primes(E, mw, p, FILTER_PRIMES, 2**61)
    pairs = None
    for q in primes:
        m = _match_mod(E, mw, p, R, q)
        pairs = m if pairs is None else pairs & m
    found = _verify(E, mw, p, pairs)
    certified = R >= required
    if not certified:
        warnings.append(
            f"searched |a|, |b| <= {R} but the height bound needs {required}; the list is not proven complete"
        )
    closure = [{"P1": None, "P2": None, "note": "identity components of the projective closure"}]
    return SearchReport(bound, hh, required, R, found, certified, SAFETY_FACTOR, closure, warnings, rep)


# ---------------------------------------------------------------------------
# independent oracle: projective arithmetic, small primes, vectorized double loop


def _proj_add(P, Q, A, q):
    X1, Y1, Z1 = P
    X2, Y2, Z2 = Q
    if Z1 == 0:
        return Q
    if Z2 == 0:
        return P
    u = (Y2 * Z1 - Y1 * Z2) % q
    v = (X2 * Z1 - X1 * Z2) % q
    if v == 0:
        if u != 0 or Y1 % q == 0:
            return (0, 1, 0)
        # doubling
        w = (A * Z1 * Z1 + 3 * X1 * X1) % q
        s = Y1 * Z1 % q
        B = X1 * Y1 * s % q
        h = (w * w - 8 * B) % q
        return (2 * h * s % q, (w * (4 * B - h) - 8 * Y1 * Y1 * s * s) % q, 8 * s * s * s % q)
    vv = v * v % q
    vvv = vv * v % q
    R = vv * X1 * Z2 % q
    Aa = (u * u * Z1 * Z2 - vvv - 2 * R) % q
    return (v * Aa % q, (u * (R - Aa) - vvv * Y1 * Z2) % q, vvv * Z1 * Z2 % q)


def _oracle_columns(E, mw, R, q):
    A = E.A % q
    keys, xs, ys, ok = [], [], [], []
    tors = [(0, 1, 0) if T is None else (_red(T[0], q), _red(T[1], q), 1) for T in mw.torsion]
    if mw.generator is None:
        mults = {0: (0, 1, 0)}
    else:
        G = (_red(mw.generator[0], q), _red(mw.generator[1], q), 1)
        mults = {0: (0, 1, 0)}
        P = (0, 1, 0)
        for a in range(1, R + 1):
            P = _proj_add(P, G, A, q)
            mults[a] = P
            mults[-a] = (P[0], (-P[1]) % q, P[2])
    for a in sorted(mults):
        for i, T in enumerate(tors):
            if (a, i) == IDENTITY_KEY:
                continue
            X, Y, Z = _proj_add(mults[a], T, A, q)
            keys.append((a, i))
            if Z % q == 0:
                xs.append(0)
                ys.append(0)
                ok.append(False)
            else:
                zi = pow(Z, -1, q)
                xs.append(X * zi % q)
                ys.append(Y * zi % q)
                ok.append(True)
    return keys, np.array(xs, dtype=np.int64), np.array(ys, dtype=np.int64), np.array(ok)


def brute_force_pairs(E: EllipticCurveQ, mw: MWInput, p, radius: int, primes=(2147483629, 2147483587)) -> list:
    """All (a, T1, b, T2) with |a|, |b| <= radius solving p(x1) = y2, by an outer double loop."""
    p = [to_mpq(c) for c in p]
    mask = None
    keys = None
    for q in primes:
        keys, xs, ys, ok = _oracle_columns(E, mw, radius, q)
        px = np.zeros_like(xs)
        for c in reversed(p):
            px = (px * xs + _red(c, q)) % q
        m = (px[:, None] == ys[None, :]) | ~ok[:, None] | ~ok[None, :]
        mask = m if mask is None else mask & m
    idx = np.argwhere(mask)
    pairs = {(keys[i], keys[j]) for i, j in idx}
    return [(f["a"], f["T1"], f["b"], f["T2"]) for f in _verify(E, mw, p, pairs)]

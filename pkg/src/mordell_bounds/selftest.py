"""Quick invariant suite behind ``python -m mordell_bounds selftest``."""
from __future__ import annotations

import math
import random
from fractions import Fraction

import mpmath

from . import bounds, gnum
from .cm_lattice import (
    EUCLIDEAN_D,
    CMOrder,
    KLattice,
    minkowski_sides,
    orthogonal_complement,
    successive_minima,
    k_det,
)
from .elliptic import EllipticCurveQ, make_point, scalar_mul, x_multiplication_map
from .errors import RankDeficientError
from .heights import canonical_height, height_gap_check
from .search import MWInput, brute_force_pairs, search_rational_points


def _constants():
    c = bounds.c1_monomial(2, 1)
    want = bounds.Monomial({2: 41, 3: 6, "pi": -2})
    return c == want and c.value() <= 2**41 * 3**4


def _pipeline():
    E = EllipticCurveQ(0, 1)
    for D in EUCLIDEAN_D:
        o = CMOrder(D)
        for N in range(2, 5):
            for r in range(1, N):
                bounds.transverse_bound(bounds.CurveDescriptor(N, 15, 10.0, r=r, cm=o, curve_E=E))
    return True


def _bezout():
    c = bounds.bezout_C0(1, 1, 8)
    return abs(c.value - (7 / 6 + 7 * math.log(2))) < 1e-9


def _minkowski():
    rng = random.Random(1)
    for D in EUCLIDEAN_D:
        o = CMOrder(D)
        for _ in range(3):
            rows = [[(rng.randint(-3, 3), rng.randint(-2, 2)) for _ in range(2)]]
            try:
                L = KLattice(rows, o)
            except RankDeficientError:
                continue
            m = successive_minima(L)
            if not m.minkowski_ok:
                return False
            comp = orthogonal_complement(L)
            U = list(L.rows) + list(comp.rows)
            det = math.sqrt(k_det(U).norm())
            if abs(det - L.det * comp.det) > 1e-9 * det:
                return False
    return True


def _heights():
    E = EllipticCurveQ(0, -2)
    G = make_point(E, 3, 5)
    h = canonical_height(E, G).value
    for a in (2, 3):
        ha = canonical_height(E, scalar_mul(E, a, G)).value
        if abs(ha - a * a * h) > 1e-6 * a * a * h:
            return False
    return height_gap_check(E, [G, scalar_mul(E, 2, G)])[0]


def _degrees():
    return all(x_multiplication_map(n)[0].degree() == n * n for n in range(1, 5))


def _decomposition():
    rng = random.Random(2)
    for D in EUCLIDEAN_D:
        o = CMOrder(D)
        for _ in range(5):
            L = [(Fraction(rng.randint(-9, 9), 7), Fraction(rng.randint(-9, 9), 5)) for _ in range(2)]
            t = [(rng.randint(-5, 5), rng.randint(-5, 5)) for _ in range(2)]
            if not gnum.decompose_form(L, t, o).identity_ok:
                return False
    return True


def _search():
    E = EllipticCurveQ(0, 1)
    mw = MWInput(E, None, 0)
    rep = search_rational_points(E, CMOrder(-3), [-1, 1], mw, 1)
    got = [(f["a"], f["T1"], f["b"], f["T2"]) for f in rep.points_found]
    return rep.fully_certified and got == brute_force_pairs(E, mw, [-1, 1], 0)


CHECKS = [
    ("constants", _constants),
    ("pipeline", _pipeline),
    ("bezout", _bezout),
    ("minkowski", _minkowski),
    ("heights", _heights),
    ("degrees", _degrees),
    ("decomposition", _decomposition),
    ("search", _search),
]


def run_selftest() -> dict:
    results = {}
    for name, fn in CHECKS:
        try:
            results[name] = bool(fn())
        except Exception as exc:  # reported, not raised
            results[name] = f"error: {type(exc).__name__}: {exc}"
    return results

"""Acceptance criteria, one test each, with time limits.

Every test prints a single ``CRITERION n ... PASS/FAIL`` line.  Run with
``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
"""
import math
import random
import sys
import time
from contextlib import contextmanager
from fractions import Fraction

import mpmath
import pytest

from mordell_bounds import bounds, gnum
from mordell_bounds.bounds import CurveDescriptor, Monomial, transverse_bound
from mordell_bounds.cm_lattice import (
    EUCLIDEAN_D,
    CMOrder,
    KLattice,
    k_det,
    orthogonal_complement,
    successive_minima,
    omega2,
)
from mordell_bounds.elliptic import EllipticCurveQ, make_point, scalar_mul, torsion_subgroup, x_multiplication_map
from mordell_bounds.errors import RankDeficientError
from mordell_bounds.heights import canonical_height, height_gap_check
from mordell_bounds.search import (
    SAFETY_FACTOR,
    MWInput,
    brute_force_pairs,
    curve_membership,
    search_rational_points,
)

_PRINT = [None]


def _emit(line):
    if _PRINT[0] is not None:
        with _PRINT[0].disabled():
            print(line, flush=True)
    else:
        print(line, flush=True)


@pytest.fixture(autouse=True)
def _printer(capsys):
    _PRINT[0] = capsys
    yield
    _PRINT[0] = None


@contextmanager
def criterion(n, title, limit):
    t0 = time.perf_counter()
    status = "FAIL"
    try:
        yield
        status = "PASS"
    finally:
        dt = time.perf_counter() - t0
        if status == "PASS" and dt > limit:
            status = "FAIL"
        _emit(f"CRITERION {n:2d} {title}: {status} ({dt:.2f}s, limit {limit}s)")
    assert dt <= limit, f"criterion {n} took {dt:.2f}s > {limit}s"


E01 = EllipticCurveQ(0, 1)
E02 = EllipticCurveQ(0, -2)


def test_c01_constant_reproduction():
    with criterion(1, "c1_sharp(2,1) = 2^41 3^6 / pi^2 <= 2^41 3^4", 1.0):
        c = bounds.c1_monomial(2, 1)
        assert c == Monomial({2: 41, 3: 6, "pi": -2})
        # 3^2 / pi^2 < 1 is what puts it below the printed 2^41 3^4
        assert (c / Monomial({2: 41, 3: 4})).value() < 1
        t = bounds.sharp_constants(2, 1, order=CMOrder(-1), C_E=E01.C_E)
        with mpmath.workdps(50):
            assert abs(t["c1_sharp"] - mpmath.mpf(2) ** 41 * 3**6 / mpmath.pi**2) < 1e-40 * t["c1_sharp"]


def test_c02_pipeline_identity():
    with criterion(2, "closed form vs alpha/beta/gamma/T/delta pipeline to 1e-9", 10.0):
        n = 0
        for N in range(2, 6):
            for r in range(0, N):
                for D in EUCLIDEAN_D:
                    for degC in (1, 15, 100):
                        for h2C in (0, 10, 1000):
                            rep = transverse_bound(CurveDescriptor(N, degC, h2C, r=r, cm=CMOrder(D), curve_E=E01))
                            t = rep.trace
                            if r == 0:
                                # T = 1 branch: the pipeline is the bound and sits below the closed form
                                assert t["T"] == 1 and t["bound_pipeline"] <= t["bound_closed_form"]
                            else:
                                rel = abs(t["bound_pipeline"] - t["bound_closed_form"]) / t["bound_closed_form"]
                                assert rel <= 1e-9
                                n += 1
        assert n >= 50


def test_c03_exponent_identities():
    with criterion(3, "beta = C4(N,1,r)|D_K|^(N/2+3) and |D_K| exponent, exact", 1.0):
        for N in range(2, 6):
            for r in range(1, N):
                beta = bounds.beta_monomial(N, r)
                assert beta == bounds.C4_monomial(N, 1, r) * Monomial.base("DK", Fraction(N, 2) + 3)
                delta = bounds.delta_monomial(N, r)
                assert delta.dk_exponent() == Fraction(2 * N + N * r + 4 * r, 2 * (N - r))
                alpha = bounds.alpha_monomial(N)
                exp = alpha.dk_exponent() + beta.dk_exponent() * Fraction(r, N - r)
                assert exp == Fraction(2 * N + N * r + 4 * r, 2 * (N - r))


def test_c04_bezout_constant():
    with criterion(4, "C0(1,1,8) = 7/6 + 7 log 2 with discrepancy warning", 1.0):
        c = bounds.bezout_C0(1, 1, 8)
        assert abs(c.value - (7 / 6 + 7 * math.log(2))) <= 1e-9
        rep = transverse_bound(CurveDescriptor(2, 15, 10, r=1, cm=CMOrder(-1), curve_E=E01))
        assert any("C0 discrepancy" in w and "5.602" in w for w in rep.warnings)
        rep = bounds.poly_curve_bound(E02, CMOrder(None), [0, 1])
        assert any("C0 discrepancy" in w for w in rep.warnings)
        assert float(rep.trace["C0_packaged"]) == pytest.approx(5.602, abs=1e-3)


def _random_lattice(rng, order, N, r):
    bs = range(-4, 5)
    elems = [(a, b) for a in range(-4, 5) for b in bs if a * a + order.y0 * a * b - order.x0 * b * b <= 16]
    while True:
        try:
            return KLattice([[rng.choice(elems) for _ in range(N)] for _ in range(r)], order)
        except RankDeficientError:
            continue


def test_c05_minkowski_suite():
    with criterion(5, "adelic Minkowski on 100 enumerated K-lattices", 60.0):
        rng = random.Random(2024)
        count = 0
        for D in EUCLIDEAN_D:
            order = CMOrder(D)
            for _ in range(20):
                N = rng.randint(1, 3)
                r = rng.randint(1, min(2, N))
                L = _random_lattice(rng, order, N, r)
                m = successive_minima(L)
                prod = 1
                for s in m.sq_lambdas:
                    prod *= s
                lhs = omega2(r) * float(prod)
                rhs = 2**r * abs(order.D_K) ** (r / 2) * float(L.gram_det)
                assert lhs <= rhs * (1 + 1e-12)
                assert m.minkowski_ok
                count += 1
        assert count == 100


def test_c06_orthogonality_determinant():
    with criterion(6, "|det U| = det L det L_perp on 50 full stacks", 30.0):
        rng = random.Random(66)
        for k in range(50):
            order = CMOrder(EUCLIDEAN_D[k % 5])
            N = rng.randint(2, 3)
            r = rng.randint(1, N - 1)
            L = _random_lattice(rng, order, N, r)
            comp = orthogonal_complement(L)
            U = [list(u) for u in L.rows] + [list(v) for v in comp.rows]
            det_u = math.sqrt(float(k_det(U).norm()))
            assert abs(det_u - L.det * comp.det) <= 1e-9 * det_u


def test_c07_heights():
    with criterion(7, "height gap on 50 tuples; hhat(aG) = a^2 hhat(G), |a| <= 6", 60.0):
        rng = random.Random(77)
        G = make_point(E02, 3, 5)
        mult = [scalar_mul(E02, a, G) for a in range(-6, 7)]
        tors = torsion_subgroup(E01)
        for k in range(50):
            N = rng.randint(1, 3)
            if k % 2:
                pts = [rng.choice(mult) for _ in range(N)]
                assert height_gap_check(E02, pts)[0]
            else:
                pts = [rng.choice(tors) for _ in range(N)]
                assert height_gap_check(E01, pts)[0]
        h = canonical_height(E02, G).value
        for a in range(-6, 7):
            ha = canonical_height(E02, scalar_mul(E02, a, G)).value
            assert abs(ha - a * a * h) <= 1e-6 * a * a * h + (1e-12 if a == 0 else 0)


def test_c08_degree_facts():
    with criterion(8, "numerator degree of x([n]) is n^2 for n = 1..5", 10.0):
        for n in range(1, 6):
            num, den = x_multiplication_map(n)
            assert num.degree() == n * n


def test_c09_decomposition_identity():
    with criterion(9, "decomposition identity exact on 1000 random cases", 10.0):
        rng = random.Random(99)
        for k in range(1000):
            order = CMOrder(EUCLIDEAN_D[k % 5])
            N = rng.randint(1, 3)
            L = [(Fraction(rng.randint(-50, 50), rng.randint(1, 12)), Fraction(rng.randint(-50, 50), rng.randint(1, 12)))
                 for _ in range(N)]
            t = [(rng.randint(-20, 20), rng.randint(-20, 20)) for _ in range(N)]
            d = gnum.decompose_form(L, t, order)
            assert d.identity_ok and d.first_norm_ok and d.second_norm_ok


def test_c10_search_honesty():
    with criterion(10, "search honesty, brute-force agreement, torsion-only certification", 120.0):
        mw = MWInput(E02, (3, 5))
        rep = search_rational_points(E02, CMOrder(None), [0, 1], mw, 1000)
        assert rep.fully_certified is False
        assert rep.searched_radius == 1000
        bound = bounds.poly_curve_bound(E02, CMOrder(None), [0, 1]).bound_nats
        with mpmath.workdps(50):
            want = int(mpmath.ceil(mpmath.sqrt(bound * SAFETY_FACTOR / mpmath.mpf(rep.hhat_G))))
        assert rep.required_coeff_radius == want
        got = [(f["a"], f["T1"], f["b"], f["T2"]) for f in rep.points_found]
        assert got == brute_force_pairs(E02, mw, [0, 1], rep.searched_radius)

        mw0 = MWInput(E01, None, 0)
        rep0 = search_rational_points(E01, CMOrder(-3), [-1, 1], mw0, 1)
        assert rep0.fully_certified
        T = [P for P in torsion_subgroup(E01) if P is not None]
        sweep = {(P, Q) for P in T for Q in T if curve_membership([-1, 1], P, Q)}
        assert {(f["P1"], f["P2"]) for f in rep0.points_found} == sweep


def test_c11_sharpness_table():
    with criterion(11, "c1_sharp < c1_simple for 1 <= r < N <= 6", 1.0):
        rows = bounds.sharpness_table(6)
        bad = [(x.N, x.r, mpmath.nstr(x.c1_sharp, 6), mpmath.nstr(x.c1_simple, 6)) for x in rows if not x.c1_ok]
        for b in bad:
            _emit(f"    counterexample N={b[0]} r={b[1]}: c1_sharp={b[2]} c1_simple={b[3]}")
        assert not bad


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))

import itertools
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from mordell_bounds.cm_lattice import (
    EUCLIDEAN_D,
    C1,
    CMOrder,
    KLattice,
    KNum,
    adjugate_check,
    end_mul,
    end_norm,
    gauss_reduce_pair,
    gradodet_check,
    herm,
    k_det,
    k_matrix,
    lattice_det,
    morphism_degree_bound,
    orthogonal_complement,
    sqnorm,
    subgroup_degree_bound,
    successive_minima,
    translate_height_bound,
)
from mordell_bounds.errors import InvalidInputError, RankDeficientError

ZI = CMOrder(-1)
Z3 = CMOrder(-3)
ORDERS = [CMOrder(D) for D in EUCLIDEAN_D] + [CMOrder(-1, 2), CMOrder(-2, 2)]


def test_order_data():
    assert (Z3.D_K, Z3.x0, Z3.y0) == (-3, -1, 1)
    assert (ZI.D_K, ZI.x0, ZI.y0) == (-4, -1, 0)
    assert (CMOrder(-1, 2).x0, CMOrder(-1, 2).y0) == (-4, 0)
    assert CMOrder(None).abs_DK == 1
    with pytest.raises(InvalidInputError):
        CMOrder(-4)
    with pytest.raises(InvalidInputError):
        CMOrder(-3, 2)


def test_end_norm_examples():
    assert end_norm((3, 4), ZI) == 25
    assert end_norm((0, 0), ZI) == 0
    assert end_norm((1, 1), Z3) == 3


def test_end_mul_examples():
    assert end_mul((5, 7), (1, 0), Z3) == (5, 7)
    assert end_mul((1, 1), (1, 1), ZI) == (0, 2)
    assert end_mul((0, 1), (0, 1), Z3) == (-1, 1)


@pytest.mark.parametrize("order", ORDERS, ids=repr)
def test_norm_multiplicative(order):
    rng = random.Random(hash(order) & 0xFFFF)
    for _ in range(500):
        a = (rng.randint(-20, 20), rng.randint(-20, 20))
        b = (rng.randint(-20, 20), rng.randint(-20, 20))
        assert end_norm(end_mul(a, b, order), order) == end_norm(a, order) * end_norm(b, order)
        # independent route: complex embedding
        tau = order.tau_complex
        assert end_norm(a, order) == pytest.approx(abs(a[0] + a[1] * tau) ** 2, rel=1e-12, abs=1e-9)


def test_lattice_det_examples():
    assert lattice_det(KLattice([[1, 0], [0, 1]], ZI)) == 1
    assert lattice_det(KLattice([[(1, 0), (0, 1)]], ZI)) == pytest.approx(math.sqrt(2), rel=1e-12)
    assert lattice_det(KLattice([[2, 0]], ZI)) == 2
    with pytest.raises(RankDeficientError):
        KLattice([[1, 1], [2, 2]], ZI)


def test_minima_examples():
    m = successive_minima(KLattice([[1, 0], [0, 1]], Z3))
    assert m.sq_lambdas == [1, 1] and m.minkowski_ok
    m = successive_minima(KLattice([[2, 0], [0, 1]], ZI))
    assert m.lambdas == [1, 2] and m.generates
    m = successive_minima(KLattice([[1, 1]], ZI))
    assert m.sq_lambdas == [2]
    assert math.pi * 2 <= 2 * 2 * 2
    assert m.minkowski_lhs == pytest.approx(2 * math.pi) and m.minkowski_rhs == pytest.approx(8)


def _random_lattice(rng, order, N, r, bound=16):
    bs = range(-4, 5) if order.is_cm else [0]
    elems = [(a, b) for a in range(-4, 5) for b in bs if end_norm((a, b), order) <= bound]
    while True:
        rows = [[rng.choice(elems) for _ in range(N)] for _ in range(r)]
        try:
            return KLattice(rows, order)
        except RankDeficientError:
            continue


def _brute_lambda1_sq(L, box=4):
    """Shortest nonzero vector over O_K-combinations with small coefficients."""
    F = L.field
    coeffs = [KNum(a, b, F) for a in range(-box, box + 1) for b in (range(-box, box + 1) if F.is_cm else [0])]
    best = None
    for combo in itertools.product(coeffs, repeat=L.r):
        if all(c.is_zero() for c in combo):
            continue
        v = [sum((c * row[j] for c, row in zip(combo, L.rows)), KNum(0, 0, F)) for j in range(L.N)]
        n = sqnorm(v)
        if best is None or n < best:
            best = n
    return best


@pytest.mark.parametrize("order", [CMOrder(D) for D in EUCLIDEAN_D], ids=repr)
def test_minima_properties(order):
    rng = random.Random(order.D)
    for _ in range(6):
        N = rng.randint(1, 3)
        r = rng.randint(1, min(N, 2))
        L = _random_lattice(rng, order, N, r)
        m = successive_minima(L)
        assert m.minkowski_ok
        assert all(a <= b for a, b in zip(m.sq_lambdas, m.sq_lambdas[1:]))
        for v, s in zip(m.basis, m.sq_lambdas):
            assert sqnorm(v) == s
        if r == 1:
            assert m.sq_lambdas[0] == _brute_lambda1_sq(L, box=3)
        else:
            assert m.sq_lambdas[0] <= _brute_lambda1_sq(L, box=2)
        assert gradodet_check(L, minima=m)


def test_complement_examples():
    c = orthogonal_complement(KLattice([[1, 0]], ZI))
    assert [order_pairs(ZI, r) for r in c.rows] in ([[(0, 0), (1, 0)]], [[(0, 0), (-1, 0)]])
    c = orthogonal_complement(KLattice([[1, 1]], ZI))
    assert order_pairs(ZI, c.rows[0]) in ([(1, 0), (-1, 0)], [(-1, 0), (1, 0)])
    L = KLattice([[(1, 0), (0, 1)]], ZI)
    c = orthogonal_complement(L)
    U = [list(L.rows[0]), list(c.rows[0])]
    assert L.det * c.det == pytest.approx(2)
    assert math.sqrt(k_det(U).norm()) == pytest.approx(2)
    with pytest.raises(InvalidInputError):
        orthogonal_complement(KLattice([[1, 0], [0, 1]], ZI))


def order_pairs(order, row):
    return [tuple(int(v) for v in order.from_k(z)) for z in row]


@pytest.mark.parametrize("order", [CMOrder(D) for D in EUCLIDEAN_D] + [CMOrder(None)], ids=repr)
def test_complement_det_multiplicative(order):
    rng = random.Random(11 + (order.D or 0))
    for _ in range(8):
        N = rng.randint(2, 3)
        r = rng.randint(1, N - 1)
        L = _random_lattice(rng, order, N, r, bound=9)
        c = orthogonal_complement(L)
        for u in L.rows:
            for v in c.rows:
                assert herm(u, v).is_zero()
        U = [list(x) for x in L.rows] + [list(x) for x in c.rows]
        det_u = math.sqrt(float(k_det(U).norm()))
        assert det_u == pytest.approx(L.det * c.det, rel=1e-9)


def test_adjugate_examples():
    adj, ok = adjugate_check([[1, 0], [0, 1]], ZI)
    assert [[order_pairs(ZI, [z])[0] for z in row] for row in adj] == [[(1, 0), (0, 0)], [(0, 0), (1, 0)]]
    adj, ok = adjugate_check([[(1, 0), (0, 1)], [(0, 1), (1, 0)]], ZI)
    assert [[order_pairs(ZI, [z])[0] for z in row] for row in adj] == [[(1, 0), (0, -1)], [(0, -1), (1, 0)]]
    assert ok


def test_adjugate_hadamard_random():
    rng = random.Random(3)
    elems = [(a, b) for a in range(-3, 4) for b in range(-3, 4) if a * a + b * b <= 9]
    for _ in range(20):
        U = [[rng.choice(elems) for _ in range(3)] for _ in range(3)]
        assert adjugate_check(U, ZI)[1]


def test_degree_bounds():
    assert morphism_degree_bound([1], ZI) == 2
    assert morphism_degree_bound([1, 1], ZI) == 48
    with pytest.raises(InvalidInputError):
        morphism_degree_bound([0, 0], ZI)
    assert subgroup_degree_bound(1, [[1]], ZI) == 6
    assert subgroup_degree_bound(2, [[1, 0]], ZI) == 432
    assert subgroup_degree_bound(2, [[1, 0], [0, 1]], ZI) == 10368


def test_gradodet_examples():
    assert gradodet_check(KLattice([[1, 0], [0, 1]], ZI))
    g = gradodet_check(KLattice([[(3, 0), (0, 4)]], ZI))
    assert g.ok and g.lhs == pytest.approx(432) and g.slack > 1


def test_gradodet_random_gaussian():
    rng = random.Random(5)
    elems = [(a, b) for a in range(-4, 5) for b in range(-4, 5) if a * a + b * b <= 16]
    n = 0
    while n < 100:
        N = rng.randint(1, 2)
        r = rng.randint(1, N)
        try:
            L = KLattice([[rng.choice(elems) for _ in range(N)] for _ in range(r)], ZI)
        except RankDeficientError:
            continue
        assert gradodet_check(L)
        n += 1


def test_translate_height_bound():
    assert C1(2, 1) == 1728
    v = translate_height_bound(2, 1, [[1, 0]], [1.0], ZI, 7.0)
    assert v == pytest.approx(1728 * (16 / math.pi**2 + 7.0), rel=1e-12)
    assert translate_height_bound(2, 1, [[1, 0]], [0.0], ZI, 7.0) == pytest.approx(1728 * 7.0)
    assert math.isfinite(translate_height_bound(2, 2, [[1, 0], [0, 1]], [1.0, 1.0], ZI, 7.0))
    with pytest.raises(InvalidInputError):
        translate_height_bound(1, 2, [[1], [1]], [0, 0], ZI, 1.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 100), st.floats(0, 100), st.floats(0, 50), st.floats(0, 50))
def test_translate_bound_monotone(h, dh, c, dc):
    a = translate_height_bound(2, 1, [[(1, 1), 2]], [h], Z3, c)
    b = translate_height_bound(2, 1, [[(1, 1), 2]], [h + dh], Z3, c + dc)
    assert b >= a


def test_gauss_identity():
    g = gauss_reduce_pair([[1, 0]], [[0, 1]], 2, ZI)
    assert g.permutation == [0, 1]


def test_gauss_hand_example():
    g = gauss_reduce_pair([[1, 1]], [[1, -1]], 2, ZI)
    assert g.M_perp[0][1] != (0, 0)
    assert g.M[0][0] != (0, 0)


def test_gauss_random_n3():
    rng = random.Random(9)
    done = 0
    while done < 10:
        rows = [[(rng.randint(-2, 2), rng.randint(-2, 2)) for _ in range(3)]]
        try:
            L = KLattice(rows, ZI)
        except RankDeficientError:
            continue
        comp = orthogonal_complement(L)
        perp = [order_pairs(ZI, r) for r in comp.rows]
        for pc in (1, 2, 3):
            try:
                g = gauss_reduce_pair(rows, perp, pc, ZI)
            except InvalidInputError:
                continue
            M, Mp = k_matrix(g.M, ZI), k_matrix(g.M_perp, ZI)
            for u in M:
                for v in Mp:
                    assert herm(u, v).is_zero()
            assert g.permutation[1] == pc - 1
        done += 1

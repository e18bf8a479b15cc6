import math

import mpmath
import pytest
from gmpy2 import mpq

from mordell_bounds.bounds import poly_curve_bound
from mordell_bounds.cm_lattice import CMOrder
from mordell_bounds.elliptic import EllipticCurveQ, make_point, on_curve, scalar_mul, torsion_subgroup
from mordell_bounds.errors import InvalidInputError, ResourceLimitError
from mordell_bounds.search import (
    SAFETY_FACTOR,
    MWInput,
    brute_force_pairs,
    curve_membership,
    lift_x_from_y,
    search_rational_points,
    subgroup_enumerate,
)

E1 = EllipticCurveQ(0, 1)
E2 = EllipticCurveQ(0, -2)
MW2 = MWInput(E2, (3, 5))


def test_mw_validation():
    with pytest.raises(InvalidInputError):
        MWInput(E1, (2, 3))  # torsion point
    with pytest.raises(InvalidInputError):
        MWInput(E2, (1, 1))
    with pytest.raises(InvalidInputError):
        MWInput(E2, None, 1)
    assert MW2.hhat_G > 0


def test_subgroup_enumerate_examples():
    h = MW2.hhat_G
    assert subgroup_enumerate(E2, MW2, 0.5 * h) == [None]
    pts = subgroup_enumerate(E2, MW2, 10 * h)
    assert pts == [scalar_mul(E2, a, MW2.generator) for a in range(-3, 4)]


@pytest.mark.parametrize("k", [0.3, 1, 4.5, 17, 50])
def test_subgroup_count(k):
    E = EllipticCurveQ(0, 8)
    mw = MWInput(E, (1, 3))
    pts = subgroup_enumerate(E, mw, k * mw.hhat_G)
    assert len(pts) == (2 * math.isqrt(int(k)) + 1) * len(mw.torsion)


def test_subgroup_cap():
    with pytest.raises(ResourceLimitError) as ei:
        subgroup_enumerate(E2, MW2, 1e6 * MW2.hhat_G, cap=101)
    assert ei.value.partial is not None and len(ei.value.partial) <= 101


def test_membership_examples():
    P1, P2 = make_point(E1, 2, 3), make_point(E1, 0, 1)
    assert curve_membership([-1, 1], P1, P2)
    assert not curve_membership([-1, 1], P1, make_point(E1, 0, -1))
    with pytest.raises(InvalidInputError):
        curve_membership([-1, 1], P1, None)


def test_lift_reexport():
    assert lift_x_from_y(E1, 3) == [mpq(2)]


def test_rank_zero_search_fully_certified():
    mw = MWInput(E1, None, 0)
    rep = search_rational_points(E1, CMOrder(-3), [-1, 1], mw, 1)
    assert rep.fully_certified and rep.required_coeff_radius == 0
    got = {(f["P1"], f["P2"]) for f in rep.points_found}
    # exhaustive sweep over torsion pairs
    T = [P for P in torsion_subgroup(E1) if P is not None]
    want = {(P, Q) for P in T for Q in T if curve_membership([-1, 1], P, Q)}
    assert got == want
    assert (make_point(E1, 2, 3), make_point(E1, 0, 1)) in got
    assert rep.closure_candidates


def test_rank_one_search_honest():
    rep = search_rational_points(E2, CMOrder(None), [0, 1], MW2, 1000)
    assert rep.fully_certified is False
    assert rep.searched_radius == 1000
    bound = poly_curve_bound(E2, CMOrder(None), [0, 1]).bound_nats
    with mpmath.workdps(50):
        want = int(mpmath.ceil(mpmath.sqrt(bound * SAFETY_FACTOR / rep.hhat_G)))
    assert rep.required_coeff_radius == want
    assert rep.required_coeff_radius > rep.searched_radius
    assert any("not proven complete" in w for w in rep.warnings)


def test_search_matches_brute_force_with_solutions():
    # y2 = x1 + 1 on y^2 = x^3 + 8 picks up a few small pairs
    E = EllipticCurveQ(0, 8)
    mw = MWInput(E, (1, 3))
    p = [1, 1]
    rep = search_rational_points(E, CMOrder(-3), p, mw, 6)
    got = [(f["a"], f["T1"], f["b"], f["T2"]) for f in rep.points_found]
    assert got == brute_force_pairs(E, mw, p, 6)
    for f in rep.points_found:
        assert on_curve(E, f["P1"]) and on_curve(E, f["P2"])
        assert curve_membership(p, f["P1"], f["P2"])
    assert got, "expected at least one solution in this window"


def test_radius_cap_validation():
    with pytest.raises(InvalidInputError):
        search_rational_points(E2, CMOrder(None), [0, 1], MW2, 0)

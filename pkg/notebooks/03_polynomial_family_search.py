"""
Polynomial family and the point search
======================================

For y^2 = x^3 - 2 and the curve y2 = x1, the bound is far outside
what can be enumerated.  The search reports the radius it would need
and stays uncertified.
"""
import mpmath

from mordell_bounds.bounds import poly_curve_bound
from mordell_bounds.cm_lattice import CMOrder
from mordell_bounds.elliptic import EllipticCurveQ
from mordell_bounds.search import MWInput, search_rational_points

E = EllipticCurveQ(0, -2)
rep = poly_curve_bound(E, CMOrder(None), [0, 1])
print("bound (nats):", mpmath.nstr(rep.bound_nats, 8))
print("K:", mpmath.nstr(rep.extras["K"], 6))
for w in rep.warnings:
    print("warning:", w)

mw = MWInput(E, (3, 5))
s = search_rational_points(E, CMOrder(None), [0, 1], mw, 1000)
print("required radius:", s.required_coeff_radius)
print("searched radius:", s.searched_radius)
print("points:", [(f["a"], f["b"]) for f in s.points_found])
print("fully certified:", s.fully_certified)

# rank 0 works end to end
E1 = EllipticCurveQ(0, 1)
s0 = search_rational_points(E1, CMOrder(-3), [-1, 1], MWInput(E1, None, 0), 1)
print("rank 0 points:", [(f["P1"], f["P2"]) for f in s0.points_found])
print("fully certified:", s0.fully_certified)

"""
Constants of the transverse bound
=================================

Exact monomials for c1, the two routes to the bound, and the
comparison against the simple constants.
"""
import mpmath

from mordell_bounds import bounds
from mordell_bounds.bounds import CurveDescriptor, transverse_bound
from mordell_bounds.cm_lattice import CMOrder
from mordell_bounds.elliptic import EllipticCurveQ

# c1 for (N, r) = (2, 1) as an exact product of prime powers and pi
c1 = bounds.c1_monomial(2, 1)
print("c1_sharp(2,1) exponents:", c1.exps)
print("c1_sharp(2,1) =", mpmath.nstr(c1.value(), 10))

# the rigorous Bezout constant next to the packaged one
print("C0 rigorous N=2:", bounds.C0_rigorous(2))
print("C0 packaged N=2:", bounds.C0_packaged(2))

# closed form and pipeline on y^2 = x^3 + 1 with CM by Z[i]
E = EllipticCurveQ(0, 1)
rep = transverse_bound(CurveDescriptor(2, 15, 100.0, r=1, cm=CMOrder(-1), curve_E=E))
t = rep.trace
print("closed form:", mpmath.nstr(t["bound_closed_form"], 15))
print("pipeline:   ", mpmath.nstr(t["bound_pipeline"], 15))
for w in rep.warnings:
    print("warning:", w)

# sharp vs simple constants
for row in bounds.sharpness_table(6):
    print(f"N={row.N} r={row.r}  c1_sharp={mpmath.nstr(row.c1_sharp, 4):>10}  "
          f"c1_simple={mpmath.nstr(row.c1_simple, 4):>10}  ok={row.c1_ok}")

"""
Heights and K-lattices
======================
"""
from mordell_bounds.cm_lattice import CMOrder, KLattice, orthogonal_complement, successive_minima
from mordell_bounds.elliptic import EllipticCurveQ, make_point, scalar_mul
from mordell_bounds.heights import canonical_height, height_gap_check

E = EllipticCurveQ(0, -2)
G = make_point(E, 3, 5)
h = canonical_height(E, G).value
print("hhat(3,5) =", h)

# quadratic scaling, a^2 hhat(G)
for a in range(1, 6):
    ha = canonical_height(E, scalar_mul(E, a, G)).value
    print(a, ha, ha / (a * a * h))

print("gap check:", height_gap_check(E, [G, scalar_mul(E, 2, G)])[0])

# a rank-one lattice in O_K^2 for K = Q(i)
ZI = CMOrder(-1)
L = KLattice([[(1, 0), (1, 1)]], ZI)
m = successive_minima(L)
print("squared minima:", m.sq_lambdas, "minkowski ok:", m.minkowski_ok)
comp = orthogonal_complement(L)
print("complement rows:", comp.rows)
print("det L * det L_perp =", L.det * comp.det)

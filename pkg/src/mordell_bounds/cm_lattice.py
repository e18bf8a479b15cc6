"""Imaginary quadratic orders and K-lattices in End(E)^N.

Elements of K = Q(sqrt D) are stored as ``KNum`` pairs of Fractions in the
basis (1, w) of the maximal order O_K, with w = (1 + sqrt D)/2 when D = 1 mod 4
and w = sqrt D otherwise.  Elements of the order Z[tau] itself are ``(a, b)``
integer pairs meaning a + b*tau.  The non-CM case is the order Z, with b = 0
and every |D_K| factor equal to 1.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

import numpy as np

from .errors import InvalidInputError, RankDeficientError, ResourceLimitError

# D for which O_K is norm-Euclidean; column reduction over O_K needs this.
EUCLIDEAN_D = (-1, -2, -3, -7, -11)
ENUM_CAP = 10**7


def ball_volume(k: int) -> float:
    """Volume of the unit ball in R^k; omega_0 = 1."""
    return math.pi ** (k / 2) / math.gamma(k / 2 + 1)


def omega2(n: int) -> float:
    """omega_{2n} = pi^n / n!."""
    return math.pi**n / math.factorial(n)


def _squarefree(n: int) -> bool:
    n = abs(n)
    p = 2
    while p * p <= n:
        if n % (p * p) == 0:
            return False
        p += 1
    return True


class CMOrder:
    """The order Z[tau] with tau^2 = x0 + y0*tau, or Z when ``D is None``."""

    def __init__(self, D=None, f: int = 1):
        if D is None:
            self.is_cm = False
            self.D, self.f, self.D_K = None, 1, 1
            self.x0, self.y0 = 0, 0
            self.field = KField(0, 0, 0j, 1, False)
            return
        if isinstance(D, bool) or not isinstance(D, int) or D >= 0 or not _squarefree(D):
            raise InvalidInputError(f"D must be a squarefree negative integer, got {D!r}")
        if f not in (1, 2):
            raise InvalidInputError(f"conductor must be 1 or 2, got {f!r}")
        self.is_cm = True
        self.D, self.f = D, f
        if D % 4 == 1:
            if f != 1:
                raise InvalidInputError("D = 1 mod 4 forces conductor 1")
            self.D_K = D
            self.x0, self.y0 = (D - 1) // 4, 1
            w = complex(0.5, math.sqrt(-D) / 2)
            self.field = KField((D - 1) // 4, 1, w, D, True)
        else:
            self.D_K = 4 * D
            self.x0, self.y0 = f * f * D, 0
            self.field = KField(D, 0, complex(0, math.sqrt(-D)), 4 * D, True)

    @property
    def abs_DK(self) -> int:
        return abs(self.D_K)

    @property
    def tau_abs(self) -> float:
        return math.sqrt(-self.x0) if self.is_cm else 1.0

    @property
    def tau_complex(self) -> complex:
        if not self.is_cm:
            return 1 + 0j
        return complex(self.y0 / 2, math.sqrt(-self.x0 - self.y0 * self.y0 / 4))

    @property
    def euclidean(self) -> bool:
        return (not self.is_cm) or self.D in EUCLIDEAN_D

    # conversions between a + b*tau and the (1, w) basis of O_K
    def to_k(self, elem) -> "KNum":
        if isinstance(elem, KNum):
            return elem
        if isinstance(elem, int):
            elem = (elem, 0)
        a, b = elem
        if not self.is_cm and b != 0:
            raise InvalidInputError("non-CM order Z has no tau component")
        scale = self.f if (self.is_cm and self.D % 4 != 1) else 1
        return KNum(Fraction(a), Fraction(b) * scale, self.field)

    def from_k(self, z: "KNum") -> tuple:
        scale = self.f if (self.is_cm and self.D % 4 != 1) else 1
        return (z.p, z.q / scale)

    def describe(self) -> dict:
        if not self.is_cm:
            return {"D": None, "f": 1, "D_K": 1, "tau_sq": None}
        return {"D": self.D, "f": self.f, "D_K": self.D_K, "tau_sq": [self.x0, self.y0]}

    def __eq__(self, other):
        return isinstance(other, CMOrder) and (self.D, self.f) == (other.D, other.f)

    def __hash__(self):
        return hash((self.D, self.f))

    def __repr__(self):
        return "CMOrder(non-CM)" if not self.is_cm else f"CMOrder(D={self.D}, f={self.f})"


@dataclass(frozen=True)
class KField:
    x0: int  # w^2 = x0 + y0*w
    y0: int
    w: complex
    D_K: int
    is_cm: bool


class KNum:
    """p + q*w in K."""

    __slots__ = ("p", "q", "F")

    def __init__(self, p, q, F: KField):
        self.p = Fraction(p)
        self.q = Fraction(q)
        self.F = F

    def _wrap(self, other):
        if isinstance(other, KNum):
            return other
        return KNum(other, 0, self.F)

    def __add__(self, o):
        o = self._wrap(o)
        return KNum(self.p + o.p, self.q + o.q, self.F)

    __radd__ = __add__

    def __neg__(self):
        return KNum(-self.p, -self.q, self.F)

    def __sub__(self, o):
        return self + (-self._wrap(o))

    def __rsub__(self, o):
        return self._wrap(o) - self

    def __mul__(self, o):
        o = self._wrap(o)
        F = self.F
        qq = self.q * o.q
        return KNum(self.p * o.p + F.x0 * qq, self.p * o.q + self.q * o.p + F.y0 * qq, F)

    __rmul__ = __mul__

    def conj(self):
        return KNum(self.p + self.F.y0 * self.q, -self.q, self.F)

    def norm(self) -> Fraction:
        return self.p * self.p + self.F.y0 * self.p * self.q - self.F.x0 * self.q * self.q

    def re(self) -> Fraction:
        return self.p + Fraction(self.F.y0, 2) * self.q

    def inverse(self):
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of 0 in K")
        c = self.conj()
        return KNum(c.p / n, c.q / n, self.F)

    def __truediv__(self, o):
        return self * self._wrap(o).inverse()

    def __eq__(self, o):
        if not isinstance(o, KNum):
            o = self._wrap(o)
        return self.p == o.p and self.q == o.q

    def __hash__(self):
        return hash((self.p, self.q))

    def is_zero(self) -> bool:
        return self.p == 0 and self.q == 0

    def is_integral(self) -> bool:
        return self.p.denominator == 1 and self.q.denominator == 1

    def to_complex(self) -> complex:
        return complex(float(self.p)) + float(self.q) * self.F.w

    def key(self):
        return (self.p, self.q)

    def __repr__(self):
        return f"KNum({self.p}, {self.q})"


# ---------------------------------------------------------------------------
# End(E) element arithmetic


def end_norm(alpha, order: CMOrder) -> int:
    """|a + b tau|^2 = a^2 + y0 a b - x0 b^2."""
    if isinstance(alpha, int):
        alpha = (alpha, 0)
    a, b = alpha
    if not order.is_cm and b != 0:
        raise InvalidInputError("non-CM order Z has no tau component")
    return a * a + order.y0 * a * b - order.x0 * b * b


def end_mul(alpha, beta, order: CMOrder) -> tuple:
    """(a + b tau)(c + d tau) using tau^2 = x0 + y0 tau."""
    a, b = alpha
    c, d = beta
    if not order.is_cm and (b or d):
        raise InvalidInputError("non-CM order Z has no tau component")
    bd = b * d
    return (a * c + order.x0 * bd, a * d + b * c + order.y0 * bd)


def end_conj(alpha, order: CMOrder) -> tuple:
    a, b = alpha
    return (a + b * order.y0, -b)


# ---------------------------------------------------------------------------
# linear algebra over K


def _vec(order: CMOrder, row) -> tuple:
    return tuple(order.to_k(e) for e in row)


def herm(u, v):
    """<u, v> = sum u_i conj(v_i)."""
    F = u[0].F
    return reduce(lambda s, t: s + t, (a * b.conj() for a, b in zip(u, v)), KNum(0, 0, F))


def sqnorm(u) -> Fraction:
    return sum((a.norm() for a in u), Fraction(0))


def k_det(mat) -> KNum:
    """Determinant over K by fraction-exact elimination."""
    n = len(mat)
    if n == 0:
        raise InvalidInputError("empty matrix")
    F = mat[0][0].F
    a = [list(r) for r in mat]
    det = KNum(1, 0, F)
    for c in range(n):
        piv = next((i for i in range(c, n) if not a[i][c].is_zero()), None)
        if piv is None:
            return KNum(0, 0, F)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det = det * a[c][c]
        inv = a[c][c].inverse()
        for i in range(c + 1, n):
            if a[i][c].is_zero():
                continue
            fct = a[i][c] * inv
            a[i] = [x - fct * y for x, y in zip(a[i], a[c])]
    return det


def k_rank(rows) -> int:
    if not rows:
        return 0
    a = [list(r) for r in rows]
    n_rows, n_cols = len(a), len(a[0])
    rank = 0
    for c in range(n_cols):
        piv = next((i for i in range(rank, n_rows) if not a[i][c].is_zero()), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        inv = a[rank][c].inverse()
        for i in range(n_rows):
            if i != rank and not a[i][c].is_zero():
                fct = a[i][c] * inv
                a[i] = [x - fct * y for x, y in zip(a[i], a[rank])]
        rank += 1
        if rank == n_rows:
            break
    return rank


def k_inverse(mat):
    n = len(mat)
    F = mat[0][0].F
    a = [list(r) + [KNum(int(i == j), 0, F) for j in range(n)] for i, r in enumerate(mat)]
    for c in range(n):
        piv = next((i for i in range(c, n) if not a[i][c].is_zero()), None)
        if piv is None:
            raise RankDeficientError("singular matrix over K")
        a[c], a[piv] = a[piv], a[c]
        inv = a[c][c].inverse()
        a[c] = [x * inv for x in a[c]]
        for i in range(n):
            if i != c and not a[i][c].is_zero():
                fct = a[i][c]
                a[i] = [x - fct * y for x, y in zip(a[i], a[c])]
    return [r[n:] for r in a]


def k_matmul(A, B):
    F = A[0][0].F
    zero = KNum(0, 0, F)
    return [[reduce(lambda s, t: s + t, (A[i][k] * B[k][j] for k in range(len(B))), zero)
             for j in range(len(B[0]))] for i in range(len(A))]


# ---------------------------------------------------------------------------
# K-lattices


class KLattice:
    """O_K-module spanned by K-independent rows in O_K^N.

    ``rows`` may hold (a, b) pairs in ``order`` or ``KNum`` entries.  For a
    conductor-2 order the rows are read in the maximal order containing it.
    """

    def __init__(self, rows, order: CMOrder):
        if not rows:
            raise InvalidInputError("a lattice needs at least one row")
        self.order = order
        self.rows = [_vec(order, r) for r in rows]
        self.N = len(self.rows[0])
        if any(len(r) != self.N for r in self.rows):
            raise InvalidInputError("rows of different lengths")
        if self.r > self.N:
            raise RankDeficientError("more rows than the ambient dimension")
        if not all(e.is_integral() for row in self.rows for e in row):
            raise InvalidInputError("lattice rows must lie in O_K^N")
        self.gram = [[herm(u, v) for v in self.rows] for u in self.rows]
        g = k_det(self.gram)
        if g.is_zero():
            raise RankDeficientError("rows are K-linearly dependent")
        self.gram_det = g.p  # hermitian, so real
        self.det = math.sqrt(self.gram_det)

    @property
    def r(self) -> int:
        return len(self.rows)

    @property
    def field(self) -> KField:
        return self.order.field


def lattice_det(L: KLattice) -> float:
    """sqrt(det(M conj(M)^t))."""
    return L.det


@dataclass
class MinimaResult:
    basis: list
    lambdas: list
    sq_lambdas: list
    minkowski_ok: bool
    generates: bool
    radius: float
    n_enumerated: int
    minkowski_lhs: float
    minkowski_rhs: float


def _z_basis(L: KLattice):
    """Z-basis u_i, w u_i and the matching O_K coefficients."""
    F = L.field
    one, w = KNum(1, 0, F), KNum(0, 1, F)
    vecs, coeffs = [], []
    for i, u in enumerate(L.rows):
        vecs.append(u)
        coeffs.append((i, one))
    if F.is_cm:
        for i, u in enumerate(L.rows):
            vecs.append(tuple(w * e for e in u))
            coeffs.append((i, w))
    return vecs, coeffs


def minkowski_sides(lambda_sq_prod: Fraction, L: KLattice) -> tuple:
    """Both sides of the adelic Minkowski inequality for L (floats).

    CM: omega_{2r} (prod lambda)^2 <= 2^r |D_K|^{r/2} det^2.
    Non-CM (Z-lattice): omega_r prod lambda <= 2^r det, squared.
    """
    r = L.r
    if L.field.is_cm:
        lhs = omega2(r) * float(lambda_sq_prod)
        rhs = 2**r * abs(L.field.D_K) ** (r / 2) * float(L.gram_det)
    else:
        lhs = ball_volume(r) ** 2 * float(lambda_sq_prod)
        rhs = 4**r * float(L.gram_det)
    return lhs, rhs


def successive_minima(L: KLattice, cap: int = ENUM_CAP, tie_cap: int = 20000) -> MinimaResult:
    """Successive minima by exhaustive enumeration of short vectors.

    The search radius is the smaller of the longest given row and the bound on
    lambda_r coming from Minkowski with lambda_1 >= 1.  Ties are broken
    lexicographically; among tied choices one that generates L over O_K is
    preferred.
    """
    vecs, coeffs = _z_basis(L)
    n = len(vecs)
    G = [[(herm(a, b)).re() for b in vecs] for a in vecs]
    Gf = np.array([[float(x) for x in row] for row in G])
    r = L.r
    basis_r2 = max(sqnorm(u) for u in L.rows)
    lhs_unit = minkowski_sides(Fraction(1), L)
    mink_r2 = lhs_unit[1] / lhs_unit[0]  # lambda_r^2 bound when the others are >= 1
    R2 = min(float(basis_r2), mink_r2) * (1 + 1e-9) + 1e-9
    result = _enumerate_minima(L, vecs, coeffs, G, Gf, R2, cap, tie_cap)
    if result is None:
        R2 = float(basis_r2) * (1 + 1e-9) + 1e-9
        result = _enumerate_minima(L, vecs, coeffs, G, Gf, R2, cap, tie_cap)
    if result is None:
        raise AssertionError("enumeration missed the given basis")
    return result


def _enumerate_minima(L, vecs, coeffs, G, Gf, R2, cap, tie_cap):
    n = len(vecs)
    Ginv = np.linalg.inv(Gf)
    bounds = [int(math.floor(math.sqrt(R2 * max(Ginv[i, i], 0.0)) + 1e-9)) for i in range(n)]
    shape = tuple(2 * b + 1 for b in bounds)
    total = math.prod(shape)
    if total > cap:
        raise ResourceLimitError(
            f"minima enumeration needs {total} candidates (cap {cap})", radius=math.sqrt(R2)
        )
    offs = np.array(bounds)
    found = []
    chunk = 1 << 18
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk))
        X = np.stack(np.unravel_index(idx, shape), axis=1) - offs
        q = np.einsum("ij,jk,ik->i", X, Gf, X)
        keep = np.nonzero(q <= R2 * (1 + 1e-9) + 1e-9)[0]
        for k in keep:
            found.append(tuple(int(c) for c in X[k]))
    F = L.field
    N = L.N
    cands = []
    for c in found:
        if not any(c):
            continue
        v = [KNum(0, 0, F) for _ in range(N)]
        for ci, z in zip(c, vecs):
            if ci:
                v = [a + ci * b for a, b in zip(v, z)]
        nv = sqnorm(v)
        if float(nv) > R2:
            continue
        cvec = [KNum(0, 0, F) for _ in range(L.r)]
        for ci, (i, unit) in zip(c, coeffs):
            if ci:
                cvec[i] = cvec[i] + ci * unit
        cands.append((nv, tuple((-e.p, -e.q) for e in v), tuple(v), tuple(cvec)))
    cands.sort(key=lambda t: (t[0], t[1]))
    # greedy: the minima values
    chosen = []
    for cand in cands:
        if k_rank([c[2] for c in chosen] + [cand[2]]) == len(chosen) + 1:
            chosen.append(cand)
            if len(chosen) == L.r:
                break
    if len(chosen) < L.r:
        return None
    levels = [c[0] for c in chosen]
    best = _generating_choice(cands, levels, tie_cap)
    generates = best is not None
    if best is None:
        best = chosen
    prod = reduce(lambda a, b: a * b, levels, Fraction(1))
    lhs, rhs = minkowski_sides(prod, L)
    return MinimaResult(
        basis=[list(c[2]) for c in best],
        lambdas=[math.sqrt(float(x)) for x in levels],
        sq_lambdas=levels,
        minkowski_ok=lhs <= rhs * (1 + 1e-12),
        generates=generates,
        radius=math.sqrt(R2),
        n_enumerated=len(found),
        minkowski_lhs=lhs,
        minkowski_rhs=rhs,
    )


def _generating_choice(cands, levels, tie_cap):
    """DFS over tied vectors for a choice whose coefficient matrix is in GL_r(O_K)."""
    by_level = {}
    for c in cands:
        by_level.setdefault(c[0], []).append(c)
    budget = [tie_cap]

    def dfs(i, chosen):
        if i == len(levels):
            d = k_det([list(c[3]) for c in chosen])
            return list(chosen) if d.norm() == 1 else None
        for c in by_level.get(levels[i], []):
            if budget[0] <= 0:
                return None
            budget[0] -= 1
            if c in chosen:
                continue
            if k_rank([x[2] for x in chosen] + [c[2]]) == i + 1:
                res = dfs(i + 1, chosen + [c])
                if res is not None:
                    return res
        return None

    return dfs(0, [])


# ---------------------------------------------------------------------------
# orthogonal complements by column reduction over O_K


def _round_div(a: KNum, b: KNum) -> KNum:
    """Nearest-ish quotient q in O_K with N(a - q b) < N(b)."""
    ex = a / b
    F = a.F
    best = None
    for p in (math.floor(ex.p), math.ceil(ex.p)):
        for q in (math.floor(ex.q), math.ceil(ex.q)):
            cand = KNum(p, q, F)
            rem = (a - cand * b).norm()
            key = (rem, p, q)
            if best is None or key < best[0]:
                best = (key, cand)
    if not best[0][0] < b.norm():
        raise AssertionError("Euclidean step failed; D is not norm-Euclidean")
    return best[1]


def kernel_basis(W, order: CMOrder):
    """Columns spanning {v in O_K^N : W v = 0} as a saturated O_K-module.

    Returns (kernel_vectors, V, rank) where V is the unimodular transform with
    W V in column echelon form.
    """
    if not order.euclidean:
        raise InvalidInputError(f"column reduction needs a norm-Euclidean O_K; D={order.D} is not")
    F = order.field
    m, N = len(W), len(W[0])
    A = [list(r) for r in W]
    V = [[KNum(int(i == j), 0, F) for j in range(N)] for i in range(N)]

    def col_op(j, k, q):  # col_j -= q col_k
        for M in (A, V):
            for row in M:
                row[j] = row[j] - q * row[k]

    def swap(j, k):
        for M in (A, V):
            for row in M:
                row[j], row[k] = row[k], row[j]

    piv = 0
    for i in range(m):
        if piv >= N:
            break
        while True:
            nz = [j for j in range(piv, N) if not A[i][j].is_zero()]
            if not nz:
                break
            j0 = min(nz, key=lambda j: (A[i][j].norm(), j))
            if j0 != piv:
                swap(j0, piv)
            done = True
            for j in range(piv + 1, N):
                if not A[i][j].is_zero():
                    col_op(j, piv, _round_div(A[i][j], A[i][piv]))
                    if not A[i][j].is_zero():
                        done = False
            if done:
                break
        if any(not A[i][j].is_zero() for j in range(piv, N)):
            piv += 1
    kernel = [tuple(V[row][j] for row in range(N)) for j in range(piv, N)]
    return kernel, V, piv


def orthogonal_complement(L: KLattice) -> KLattice:
    """Saturated lattice of v in O_K^N with <v, u> = 0 for all rows u."""
    if L.r >= L.N:
        raise InvalidInputError("full-rank lattice has zero orthogonal complement")
    W = [[e.conj() for e in u] for u in L.rows]
    kernel, _, rank = kernel_basis(W, L.order)
    if rank != L.r:
        raise RankDeficientError("rows are dependent")
    for v in kernel:
        for u in L.rows:
            if not herm(v, u).is_zero():
                raise AssertionError("complement vector not orthogonal")
    comp = KLattice([list(v) for v in kernel], L.order)
    return comp


# ---------------------------------------------------------------------------
# adjugate, degree calculus and the translate bound


def k_matrix(U, order: CMOrder):
    return [list(_vec(order, row)) for row in U]


def adjugate_check(U, order: CMOrder):
    """Exact adjugate U* with U U* = det(U) Id, and the Hadamard entry test.

    Column i of U* holds cofactors of row i, so each of its entries is bounded
    by prod_{j != i} ||u_j|| (rows u_j); that is the ``hadamard_ok`` flag.
    """
    M = k_matrix(U, order)
    n = len(M)
    F = order.field
    if any(len(r) != n for r in M):
        raise InvalidInputError("adjugate needs a square matrix")
    if n == 1:
        adj = [[KNum(1, 0, F)]]
    else:
        adj = [[None] * n for _ in range(n)]
        for i in range(n):
            for k in range(n):
                minor = [row[:k] + row[k + 1:] for a, row in enumerate(M) if a != i]
                c = k_det(minor)
                adj[k][i] = c if (i + k) % 2 == 0 else -c
    det = k_det(M)
    prod = k_matmul(M, adj)
    for i in range(n):
        for j in range(n):
            if prod[i][j] != (det if i == j else KNum(0, 0, F)):
                raise AssertionError("U U* != det(U) Id")
    row_sq = [sqnorm(r) for r in M]
    ok = True
    for i in range(n):
        bound = reduce(lambda a, b: a * b, (row_sq[j] for j in range(n) if j != i), Fraction(1))
        if any(adj[k][i].norm() > bound for k in range(n)):
            ok = False
    return adj, ok


def morphism_degree_bound(l, order: CMOrder) -> int:
    """12^{N-1} 2 sum |l_i|^2."""
    N = len(l)
    s = sum(end_norm(tuple(e) if not isinstance(e, int) else e, order) for e in l)
    if N == 0 or s == 0:
        raise InvalidInputError("the zero morphism has no degree bound")
    return 12 ** (N - 1) * 2 * s


def subgroup_degree_bound(N: int, rows, order: CMOrder):
    """3^N N! (12^{N-1} 2)^s prod ||u_i||^2 (exact when norms are rational)."""
    L = KLattice(rows, order)
    if L.N != N:
        raise InvalidInputError("row length differs from N")
    prod = reduce(lambda a, b: a * b, (sqnorm(u) for u in L.rows), Fraction(1))
    val = 3**N * math.factorial(N) * (12 ** (N - 1) * 2) ** L.r * prod
    return int(val) if val.denominator == 1 else val


@dataclass
class GradodetResult:
    ok: bool
    lhs: float
    rhs: float

    def __bool__(self):
        return self.ok

    @property
    def slack(self) -> float:
        return self.rhs / self.lhs


def gradodet_check(L: KLattice, order: CMOrder | None = None, minima: MinimaResult | None = None):
    """deg B / (det L)^2 against the Minkowski-derived ceiling."""
    order = order or L.order
    minima = minima or successive_minima(L)
    N, r = L.N, L.r
    deg = subgroup_degree_bound(N, minima.basis, L.order)
    lhs = float(Fraction(deg) / L.gram_det)
    base = 3**N * math.factorial(N) * (12 ** (N - 1) * 2) ** r
    if L.field.is_cm:
        rhs = base * 2**r * abs(L.field.D_K) ** (r / 2) / omega2(r)
    else:
        rhs = base * (2**r / ball_volume(r)) ** 2
    return GradodetResult(lhs <= rhs * (1 + 1e-12), lhs, rhs)


def C1(N: int, s: int) -> int:
    return N * (N - s + 1) * 3**N * math.factorial(N) * (12 ** (N - 1) * 2) ** s


def translate_height_bound(N, s, rows, hhat_values, order: CMOrder, C_E) -> float:
    """Height bound for the translate from rows realizing the minima."""
    if s > N or s < 1:
        raise InvalidInputError("need 1 <= s <= N")
    if len(rows) != s or len(hhat_values) != s:
        raise InvalidInputError("need s rows and s heights")
    if any(h < 0 for h in hhat_values):
        raise InvalidInputError("heights are nonnegative")
    norms = [sqnorm(_vec(order, u)) for u in rows]
    if any(n == 0 for n in norms):
        raise InvalidInputError("zero row")
    prod = float(reduce(lambda a, b: a * b, norms, Fraction(1)))
    dk = order.abs_DK
    geo = 2**N * dk ** (N / 2) / (omega2(N - s) * omega2(s))
    inner = geo * sum(h / float(n) for h, n in zip(hhat_values, norms)) + C_E
    return C1(N, s) * prod * inner


# ---------------------------------------------------------------------------
# Gauss reduction of the pair (Phi, Phi_perp)


@dataclass
class GaussReduction:
    M: list
    M_perp: list
    permutation: list  # new column j holds old column permutation[j] (0-based)


def _clear_row(row, order: CMOrder):
    """Smallest positive integer multiple of the row lying in Z[tau]^N."""
    d = 1
    for z in row:
        a, b = order.from_k(z)
        d = math.lcm(d, a.denominator, b.denominator)
    out = []
    for z in row:
        a, b = order.from_k(z * d)
        out.append((int(a), int(b)))
    return out


def gauss_reduce_pair(Phi, PhiPerp, pivot_col: int, order: CMOrder) -> GaussReduction:
    """Bring (Phi, Phi_perp) to the block forms (diag(a) | *) and (* | diag(b)).

    ``pivot_col`` is 1-based like the coordinates of E^N; after the column
    permutation it sits at position N - t + 1.  Entries of M and M_perp are
    (a, b) pairs in ``order``.
    """
    P = k_matrix(Phi, order)
    Q = k_matrix(PhiPerp, order)
    n_rows, t = len(P), len(Q)
    N = len(P[0]) if P else len(Q[0])
    if n_rows + t != N:
        raise InvalidInputError("Phi and Phi_perp must have N - t and t rows")
    if not 1 <= pivot_col <= N:
        raise InvalidInputError(f"pivot_col must be in 1..{N}")
    if n_rows and k_rank(P) != n_rows or k_rank(Q) != t:
        raise RankDeficientError("Phi or Phi_perp is not of full rank")
    for u in P:
        for v in Q:
            if not herm(u, v).is_zero():
                raise InvalidInputError("rows of Phi_perp are not orthogonal to rows of Phi")
    pc = pivot_col - 1
    others = [j for j in range(N) if j != pc]
    S = None
    for comb in itertools.combinations(others, n_rows):
        if n_rows == 0 or k_rank([[row[j] for j in comb] for row in P]) == n_rows:
            S = list(comb)
            break
    if S is None:
        raise InvalidInputError(
            f"column {pivot_col} cannot be moved to position {N - t + 1}: every invertible "
            "minor of Phi uses it (the pivot coordinate is torsion on the kernel)"
        )
    rest = [j for j in range(N) if j not in S and j != pc]
    perm = S + [pc] + rest
    Pp = [[row[j] for j in perm] for row in P]
    Qp = [[row[j] for j in perm] for row in Q]
    if n_rows:
        inv = k_inverse([r[:n_rows] for r in Pp])
        Mk = k_matmul(inv, Pp)
    else:
        Mk = []
    invq = k_inverse([r[n_rows:] for r in Qp])
    Mq = k_matmul(invq, Qp)
    M = [_clear_row(r, order) for r in Mk]
    Mp = [_clear_row(r, order) for r in Mq]
    Mkk = k_matrix(M, order)
    Mqq = k_matrix(Mp, order)
    for i in range(n_rows):
        for j in range(n_rows):
            if (i == j) == Mkk[i][j].is_zero():
                raise AssertionError("M is not in block form")
    for i in range(t):
        for j in range(t):
            if (i == j) == Mqq[i][n_rows + j].is_zero():
                raise AssertionError("M_perp is not in block form")
    for u in Mkk:
        for v in Mqq:
            if not herm(u, v).is_zero():
                raise AssertionError("M M_perp^H != 0")
    return GaussReduction(M, Mp, perm)

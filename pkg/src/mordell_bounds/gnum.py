"""Geometry of numbers for the auxiliary translate.

Hermitian height pairings, the linear forms attached to a point of rank m,
the real decomposition of complex forms, short-vector certificates and the
constants C2..C5 of the auxiliary translate.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .cm_lattice import C1, CMOrder, KNum, end_mul, end_norm, k_rank, omega2
from .errors import InconsistentDataError, InvalidInputError, ResourceLimitError

SHORT_VECTOR_NODE_CAP = 200_000


# ---------------------------------------------------------------------------
# constants


def C2(m: int) -> Fraction:
    """m^3 (2m)!^4 / 2^(4m-5)."""
    return Fraction(m**3 * math.factorial(2 * m) ** 4) / Fraction(2) ** (4 * m - 5)


def quasi_orthogonality_constant(m: int) -> Fraction:
    return Fraction(2) ** (4 * m - 3) / ((2 * m) ** 2 * math.factorial(2 * m) ** 4)


def C3(N: int, s: int) -> int:
    return 3**N * math.factorial(N) * (12 ** (N - 1) * 2) ** s


def C4(N: int, s: int, m: int):
    """C1 C2 N^2 s 2^(N+2) (2(2N)^(2N))^(2/m) / (omega_{2(N-s)} omega_{2s}) as an mpf."""
    with mpmath.workdps(40):
        c2 = mpmath.mpf(C2(m).numerator) / C2(m).denominator
        core = mpmath.mpf(2 * (2 * N) ** (2 * N)) ** (mpmath.mpf(2) / m)
        om = (mpmath.pi ** (N - s) / math.factorial(N - s)) * (mpmath.pi**s / math.factorial(s))
        return +(C1(N, s) * c2 * N * N * s * 2 ** (N + 2) * core / om)


def C5(N: int, s: int, C_E: float):
    return C1(N, s) * C_E


# ---------------------------------------------------------------------------
# pairing


@dataclass
class PairingData:
    m: int
    gram_NT: list
    gram_twist: list

    def __post_init__(self):
        self.gram_NT = np.asarray(self.gram_NT, dtype=float)
        self.gram_twist = np.asarray(self.gram_twist, dtype=float)
        if self.gram_NT.shape != (self.m, self.m) or self.gram_twist.shape != (self.m, self.m):
            raise InvalidInputError("Gram matrices must be m x m")


def assemble_pairing(data: PairingData, D: int) -> np.ndarray:
    """<g_i, g_j> = <g_i, g_j>_NT - (1/sqrt D) <g_i, sqrt D g_j>_NT."""
    if D >= 0:
        raise InvalidInputError("D must be negative")
    inv_sqrt_d = 1 / (1j * math.sqrt(-D))
    H = data.gram_NT - inv_sqrt_d * data.gram_twist
    if not np.allclose(H, H.conj().T, rtol=0, atol=1e-9):
        raise InconsistentDataError("assembled pairing is not hermitian")
    if np.any(np.abs(np.diag(H).imag) > 1e-9):
        raise InconsistentDataError("diagonal of the pairing is not real")
    if np.linalg.eigvalsh((H + H.conj().T) / 2).min() < -1e-9:
        raise InconsistentDataError("pairing is not positive semidefinite")
    return (H + H.conj().T) / 2


@dataclass
class QuasiOrthogonality:
    ok: bool
    worst_ratio: float  # min over samples of hhat(sum)/sum |a_i|^2 hhat(g_i)
    constant: float
    n_samples: int

    def __bool__(self):
        return self.ok


def quasi_orthogonality_check(gram, m: int, order: CMOrder | None = None, box: int = 3):
    """Sweep alpha in End(E)^m with |a|, |b| <= box and test the lower bound."""
    order = order or CMOrder(None)
    G = np.asarray(gram, dtype=complex)
    if G.shape != (m, m):
        raise InvalidInputError("gram must be m x m")
    tau = order.tau_complex if order.is_cm else 0j
    rng = range(-box, box + 1)
    elems = [complex(a) + b * tau for a in rng for b in (rng if order.is_cm else [0])]
    elems = np.array(elems)
    c = float(quasi_orthogonality_constant(m))
    diag = np.real(np.diag(G))
    worst = math.inf
    count = 0
    for alpha in itertools.product(range(len(elems)), repeat=m):
        a = elems[list(alpha)]
        weight = float(np.sum(np.abs(a) ** 2 * diag))
        if weight == 0:
            continue
        val = float(np.real(a @ G @ a.conj()))
        worst = min(worst, val / weight)
        count += 1
    return QuasiOrthogonality(worst >= c * (1 - 1e-12), worst, c, count)


def model_height(gram, coeffs) -> float:
    """hhat(sum c_j g_j) from the Gram matrix of the g_j."""
    c = np.asarray(coeffs, dtype=complex)
    G = np.asarray(gram, dtype=complex)
    return float(np.real(c @ G @ c.conj()))


# ---------------------------------------------------------------------------
# linear forms


@dataclass
class FormSystem:
    forms: np.ndarray  # m x N complex coefficients
    gamma: list  # N x m entries (a, b) of End(E)
    hhat_g: list
    A_max: float
    torsion_markers: list
    order: CMOrder
    C2_coefficient: float = 0.0
    scales: list = field(default_factory=list)

    @property
    def N(self) -> int:
        return self.forms.shape[1]

    @property
    def m(self) -> int:
        return self.forms.shape[0]

    def evaluate(self, u) -> np.ndarray:
        """(L_1(u), ..., L_m(u)) for u in End(E)^N given as (a, b) pairs."""
        tau = self.order.tau_complex if self.order.is_cm else 0j
        uc = np.array([complex(a) + b * tau for a, b in _pairs(u)])
        return self.forms @ uc


def _pairs(u):
    return [(e, 0) if isinstance(e, int) else tuple(e) for e in u]


def build_linear_forms(gamma, hhat_g, order: CMOrder) -> FormSystem:
    """Forms L_j = sqrt(hhat(g_j)/(N A)) (gamma_1j, ..., gamma_Nj)."""
    gamma = [list(_pairs(row)) for row in gamma]
    N = len(gamma)
    m = len(hhat_g)
    if N == 0 or any(len(row) != m for row in gamma):
        raise InvalidInputError("gamma must be N x m")
    if any(h <= 0 for h in hhat_g):
        raise InvalidInputError("generator heights must be positive")
    dk = order.abs_DK
    norms = [[end_norm(g, order) for g in row] for row in gamma]
    A = max(dk * dk * norms[i][j] * hhat_g[j] for i in range(N) for j in range(m))
    if A == 0:
        raise InvalidInputError("all-zero gamma: P is torsion and the bound holds trivially")
    tau = order.tau_complex if order.is_cm else 0j
    forms = np.zeros((m, N), dtype=complex)
    scales = []
    for j in range(m):
        sc = math.sqrt(hhat_g[j] / (N * A))
        scales.append(sc)
        for i in range(N):
            a, b = gamma[i][j]
            forms[j, i] = sc * (a + b * tau)
    for j in range(m):
        if np.linalg.norm(forms[j]) > (1 / dk) * (1 + 1e-12):
            raise AssertionError("form norm exceeds 1/|D_K|")
    markers = [all(g == (0, 0) for g in row) for row in gamma]
    coeff = float(C2(m)) * N * N * dk * dk
    return FormSystem(forms, gamma, list(hhat_g), A, markers, order, coeff, scales)


# ---------------------------------------------------------------------------
# real decomposition of a complex form


@dataclass
class Decomposition:
    value: object
    L1: list
    L2: list
    identity_ok: bool
    first_norm_ok: bool
    second_norm_ok: bool


def _split(c, order: CMOrder):
    """c = l1 + l2 tau with l1, l2 real (or rational for exact input)."""
    if isinstance(c, complex) or isinstance(c, float):
        tau = order.tau_complex
        l2 = c.imag / tau.imag
        return c.real - l2 * tau.real, l2
    a, b = _pairs([c])[0]
    return Fraction(a), Fraction(b)


def decompose_form(L, t, order: CMOrder) -> Decomposition:
    """L(t) = L1(t1) + x0 L2(t2) + (L2(t1) + L1(t2) + y0 L2(t2)) tau.

    ``L`` holds either complex coefficients or exact (p, q) pairs meaning
    p + q tau with rational p, q; ``t`` holds integer (a, b) pairs.  The
    identity is checked against a direct evaluation, exactly in the second
    case, and the two norm bounds of the decomposition are evaluated.
    """
    if not order.is_cm:
        raise InvalidInputError("decomposition needs a CM order")
    parts = [_split(c, order) for c in L]
    L1 = [p[0] for p in parts]
    L2 = [p[1] for p in parts]
    ts = _pairs(t)
    t1 = [a for a, _ in ts]
    t2 = [b for _, b in ts]
    x0, y0 = order.x0, order.y0

    def ev(form, vec):
        return sum(f * v for f, v in zip(form, vec))

    re_part = ev(L1, t1) + x0 * ev(L2, t2)
    tau_part = ev(L2, t1) + ev(L1, t2) + y0 * ev(L2, t2)
    exact = all(isinstance(x, Fraction) for x in L1 + L2)
    if exact:
        direct = (Fraction(0), Fraction(0))
        for (p, q), (a, b) in zip(parts, ts):
            # (p + q tau)(a + b tau) with tau^2 = x0 + y0 tau
            qb = q * b
            direct = (direct[0] + p * a + x0 * qb, direct[1] + p * b + q * a + y0 * qb)
        identity_ok = direct == (re_part, tau_part)
        value = (re_part, tau_part)
    else:
        tau = order.tau_complex
        direct = sum(complex(c) * (a + b * tau) for c, (a, b) in zip(L, ts))
        value = re_part + tau_part * tau
        identity_ok = abs(direct - value) <= 1e-9 * max(1.0, abs(direct))
    tau = order.tau_complex
    norm_L = math.sqrt(sum(abs(float(l1) + float(l2) * tau) ** 2 for l1, l2 in parts))
    n1 = math.sqrt(sum(float(a) ** 2 + (x0 * float(b)) ** 2 for a, b in zip(L1, L2)))
    n2 = math.sqrt(sum(float(b) ** 2 + (float(a) + y0 * float(b)) ** 2 for a, b in zip(L1, L2)))
    dk = order.abs_DK
    tol = 1 + 1e-12
    return Decomposition(
        value, L1, L2, identity_ok,
        n1 <= dk * norm_L * tol + 1e-15,
        n2 <= min(2, dk) * norm_L * tol + 1e-15,
    )


# ---------------------------------------------------------------------------
# short vectors


@dataclass
class ShortVectorCertificate:
    vectors: list
    T: float
    s: int
    bounds_ok: bool
    slack: list
    branch: str
    radius: float = 0.0


def _bounds(forms: FormSystem, T: float, s: int):
    N, m = forms.N, forms.m
    tau_s = forms.order.tau_abs**s
    X = tau_s * T
    Y = 2 * (2 * (2 * N) ** (2 * N)) ** (1 / m) * tau_s * T ** (1 - N / (m * s))
    return X, Y


def verify_certificate(cert: ShortVectorCertificate, forms: FormSystem) -> bool:
    """Recompute both inequalities and K-independence from scratch."""
    order = forms.order
    s = cert.s
    if len(cert.vectors) != s:
        return False
    rows = [[order.to_k(e) for e in _pairs(u)] for u in cert.vectors]
    if k_rank(rows) != s:
        return False
    X, Y = _bounds(forms, cert.T, s)
    norms = [math.sqrt(sum(end_norm(e, order) for e in _pairs(u))) for u in cert.vectors]
    prod = math.prod(norms)
    if prod > X * (1 + 1e-12):
        return False
    for u, nu in zip(cert.vectors, norms):
        vals = np.abs(forms.evaluate(u))
        if np.any(prod * vals / nu > Y * (1 + 1e-12)):
            return False
    return True


def _elements_up_to(order: CMOrder, R2: float):
    """(a, b) in the order with |a + b tau|^2 <= R2."""
    if not order.is_cm:
        r = int(math.isqrt(int(R2)))
        return [(a, 0) for a in range(-r, r + 1)]
    tau = order.tau_complex
    bmax = int(math.sqrt(R2) / tau.imag) + 1
    out = []
    for b in range(-bmax, bmax + 1):
        amax = int(math.sqrt(R2) + abs(b * tau.real)) + 1
        for a in range(-amax, amax + 1):
            if end_norm((a, b), order) <= R2:
                out.append((a, b))
    return out


def _vectors_up_to(order: CMOrder, N: int, R2: float, cap: int):
    elems = sorted(_elements_up_to(order, R2), key=lambda e: (end_norm(e, order), e))
    norms = {e: end_norm(e, order) for e in elems}
    out = []

    def rec(prefix, used):
        if len(out) > cap:
            raise ResourceLimitError("short-vector candidate cap reached", radius=math.sqrt(R2))
        if len(prefix) == N:
            if used > 0:
                out.append(tuple(prefix))
            return
        for e in elems:
            n = norms[e]
            if used + n > R2:
                break
            prefix.append(e)
            rec(prefix, used + n)
            prefix.pop()

    rec([], 0)
    return out


def _lexkey(u):
    # prefer rational-integer entries, then positive ones
    return tuple((abs(a) + abs(b), b != 0, -a, -b) for a, b in u)


def _canonical_sign(u) -> bool:
    for a, b in u:
        if (a, b) != (0, 0):
            return a > 0 or (a == 0 and b > 0)
    return False


def short_vectors(forms: FormSystem, T: float, s: int, cap: int = 10**6,
                  node_cap: int = SHORT_VECTOR_NODE_CAP) -> ShortVectorCertificate:
    """s independent vectors of End(E)^N meeting both short-vector inequalities.

    Small T takes the first s standard basis vectors.  Otherwise vectors are
    enumerated in balls of doubling radius and a pruned depth-first search
    picks s of them; running out of budget raises ResourceLimitError, which is
    not a statement that no such vectors exist.
    """
    N = forms.N
    m = forms.m
    order = forms.order
    if not 1 <= s <= N:
        raise InvalidInputError("need 1 <= s <= N")
    if not T >= 1:
        raise InvalidInputError("need T >= 1")
    if m > N:
        raise InvalidInputError("need m <= N")
    X, Y = _bounds(forms, T, s)

    def finish(vecs, branch, radius):
        norms = [math.sqrt(sum(end_norm(e, order) for e in u)) for u in vecs]
        prod = math.prod(norms)
        worst = max(float(np.max(np.abs(forms.evaluate(u)))) * prod / nu for u, nu in zip(vecs, norms))
        cert = ShortVectorCertificate([list(u) for u in vecs], T, s, True,
                                      [X / prod, Y / worst if worst > 0 else math.inf], branch, radius)
        if not verify_certificate(cert, forms):
            raise AssertionError("short-vector certificate failed re-verification")
        return cert

    if T <= (2 * (2 * N) ** (2 * N)) ** (s / N):
        basis = [tuple((1, 0) if i == k else (0, 0) for i in range(N)) for k in range(s)]
        return finish(basis, "standard-basis", 1.0)

    R = 1.0
    while True:
        R = min(2 * R, X)
        cands = [u for u in _vectors_up_to(order, N, R * R * (1 + 1e-12), cap) if _canonical_sign(u)]
        info = []
        for u in cands:
            nu = math.sqrt(sum(end_norm(e, order) for e in u))
            lu = float(np.max(np.abs(forms.evaluate(u))))
            info.append((nu, lu / nu, u))
        info.sort(key=lambda t: (t[0] * t[1], t[0], _lexkey(t[2])))
        found = _dfs_choose(info, s, X, Y, order, node_cap)
        if found is not None:
            return finish(found, "search", R)
        if R >= X:
            raise ResourceLimitError(
                "no certificate within the full radius and node budget", radius=R
            )


def _dfs_choose(info, s, X, Y, order, node_cap):
    budget = [node_cap]

    def rec(start, chosen, prod, ratio):
        if len(chosen) == s:
            return [c[2] for c in chosen]
        for idx in range(start, len(info)):
            nu, rho, u = info[idx]
            p2 = prod * nu
            r2 = max(ratio, rho)
            if p2 > X * (1 + 1e-12) or p2 * r2 > Y * (1 + 1e-12):
                continue
            budget[0] -= 1
            if budget[0] < 0:
                raise ResourceLimitError("short-vector search node budget exhausted")
            rows = [[order.to_k(e) for e in c[2]] for c in chosen] + [[order.to_k(e) for e in u]]
            if k_rank(rows) < len(rows):
                continue
            res = rec(idx + 1, chosen + [info[idx]], p2, r2)
            if res is not None:
                return res
        return None

    return rec(0, [], 1.0, 0.0)


# ---------------------------------------------------------------------------
# the auxiliary translate


@dataclass
class AuxiliaryTranslate:
    rows: list
    deg_bound: float
    h2_bound: float
    certificate: ShortVectorCertificate


def auxiliary_translate(forms: FormSystem, T: float, s: int, m: int, hhatP: float,
                        order: CMOrder, C_E: float, N: int) -> AuxiliaryTranslate:
    """Rows of a codimension-s abelian subvariety H and bounds for H + P.

    The short vectors are taken at level sqrt(T), so the squared products of
    their norms are controlled by T itself.
    """
    if T < 1:
        raise InvalidInputError("need T >= 1")
    if N != forms.N or m != forms.m:
        raise InvalidInputError("N and m must match the form system")
    cert = short_vectors(forms, math.sqrt(T), s)
    dk = order.abs_DK
    deg = C3(N, s) * dk**s * T
    h2 = float(C4(N, s, m)) * dk ** (N / 2 + s + 2) * T ** (1 - N / (m * s)) * hhatP + C5(N, s, C_E) * dk**s * T
    return AuxiliaryTranslate(cert.vectors, deg, h2, cert)

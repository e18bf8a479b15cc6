"""Explicit height bounds for points of small rank on curves in E^N.

Constants are assembled twice where possible: as exact monomials
prod b^e (rational exponents over primes, pi and |D_K|) and numerically with
mpmath.  Upper bounds get a multiplicative guard of 1 + 1e-6.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import sympy

from . import gnum
from ._arith import to_mpq
from .cm_lattice import C1, CMOrder
from .elliptic import EllipticCurveQ
from .errors import InvalidInputError, OutOfTheoremRangeError
from .heights import weil_height

GUARD = 1 + 1e-6
DPS = 50
PUBLISHED_POLY_COEFF = 2e14
PUBLISHED_C0_N2 = 5.61
RIGOROUS = "rigorous-bezout"
PACKAGED = "published-packaged"


# ---------------------------------------------------------------------------
# exact monomials


class Monomial:
    """prod base^exp with Fraction exponents; bases are primes, 'pi' and 'DK'."""

    __slots__ = ("exps",)

    def __init__(self, exps=None):
        self.exps = {k: Fraction(v) for k, v in (exps or {}).items() if v != 0}

    @classmethod
    def integer(cls, n: int) -> "Monomial":
        n = int(n)
        if n <= 0:
            raise ValueError("monomials hold positive integers only")
        return cls({p: e for p, e in sympy.factorint(n).items()})

    @classmethod
    def rational(cls, q: Fraction) -> "Monomial":
        q = Fraction(q)
        return cls.integer(q.numerator) / cls.integer(q.denominator)

    @classmethod
    def base(cls, name, e=1) -> "Monomial":
        return cls({name: e})

    def __mul__(self, other):
        out = dict(self.exps)
        for k, v in other.exps.items():
            out[k] = out.get(k, Fraction(0)) + v
        return Monomial(out)

    def __truediv__(self, other):
        return self * other ** -1

    def __pow__(self, e):
        e = Fraction(e)
        return Monomial({k: v * e for k, v in self.exps.items()})

    def __eq__(self, other):
        return isinstance(other, Monomial) and self.exps == other.exps

    def dk_exponent(self) -> Fraction:
        return self.exps.get("DK", Fraction(0))

    def without_dk(self) -> "Monomial":
        return Monomial({k: v for k, v in self.exps.items() if k != "DK"})

    def log(self, abs_dk: int = 1):
        with mpmath.workdps(DPS):
            total = mpmath.mpf(0)
            for k, v in self.exps.items():
                b = mpmath.pi if k == "pi" else mpmath.mpf(abs_dk if k == "DK" else k)
                total += mpmath.mpf(v.numerator) / v.denominator * mpmath.log(b)
            return total

    def value(self, abs_dk: int = 1):
        with mpmath.workdps(DPS):
            return mpmath.exp(self.log(abs_dk))

    def __repr__(self):
        return "Monomial(" + ", ".join(f"{k}^{v}" for k, v in sorted(self.exps.items(), key=str)) + ")"


def _M(n) -> Monomial:
    return Monomial.integer(n)


def omega2_monomial(n: int) -> Monomial:
    """omega_{2n} = pi^n / n!."""
    return Monomial.base("pi", n) / _M(math.factorial(n))


def c1_monomial(N: int, r: int) -> Monomial:
    """c1(N, r) of the transverse bound, read with (2r)! for the factorial."""
    if not 0 <= r < N:
        raise InvalidInputError("need 0 <= r < N")
    d = N - r
    out = Monomial.base(2, Fraction(2 * N * N + 3 * N + N * r - 4 * r * r + 7 * r + 2, d))
    out = out * Monomial.base(3, Fraction((2 * N - 1) * N, d))
    out = out / (omega2_monomial(N - 1) * omega2_monomial(1)) ** Fraction(r, d)
    out = out * _M(N) ** Fraction(5 * N + 4 * r, d)
    if r:
        out = out / _M(N - 1) ** Fraction(r, d)
        out = out * _M(math.factorial(2 * r)) ** Fraction(4 * r, d) * _M(r) ** Fraction(3 * r, d)
    out = out * _M(math.factorial(N)) ** Fraction(N, d)
    return out


def alpha_monomial(N: int) -> Monomial:
    return _M(math.factorial(N)) * Monomial.base(3, 2 * N - 1) * Monomial.base(2, 2 * N - 1) * Monomial.base("DK", 1)


def beta_monomial(N: int, r: int) -> Monomial:
    if not 1 <= r < N:
        raise InvalidInputError("beta needs 1 <= r < N")
    out = _M(math.factorial(N)) * _M(N) ** Fraction(4 * (N + r), r)
    out = out * _M(math.factorial(2 * r)) ** 4 * _M(r) ** 3
    out = out * Monomial.base(2, 3 * N - 4 * r + 6 + Fraction(2 * (2 * N + 1), r)) * Monomial.base(3, 2 * N - 1)
    out = out / (omega2_monomial(N - 1) * omega2_monomial(1))
    return out * Monomial.base("DK", Fraction(N, 2) + 3)


def delta_monomial(N: int, r: int) -> Monomial:
    if r == 0:
        return _M(N) * alpha_monomial(N)
    return _M(N) * alpha_monomial(N) * (Monomial.rational(Fraction(N, N - 1)) * beta_monomial(N, r)) ** Fraction(r, N - r)


def C4_monomial(N: int, s: int, m: int) -> Monomial:
    c2 = gnum.C2(m)
    out = _M(C1(N, s)) * Monomial.rational(c2) * _M(N * N * s) * Monomial.base(2, N + 2)
    out = out * _M(2 * (2 * N) ** (2 * N)) ** Fraction(2, m)
    return out / (omega2_monomial(N - s) * omega2_monomial(s))


def dk_exponent(N: int, r: int) -> Fraction:
    return Fraction(2 * N + N * r + 4 * r, 2 * (N - r))


def c1_simple_monomial(n: int, r: int) -> Monomial:
    if not 0 <= r < n:
        raise InvalidInputError("need 0 <= r < n")
    base = Monomial.base(2, 8 * n * n) * Monomial.base(3, 2 * n * n) * _M(n) ** (9 * n * n)
    return base ** Fraction(1, n - r)


# ---------------------------------------------------------------------------
# numeric constants


def _mpf(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def harmonic(N: int) -> Fraction:
    return sum((Fraction(1, k) for k in range(1, N + 1)), Fraction(0))


@dataclass(frozen=True)
class BezoutConstant:
    rational_part: Fraction
    log2_coeff: Fraction
    value: float


def bezout_C0(d1: int, d2: int, m: int) -> BezoutConstant:
    """C0(d1, d2, m) = sum_{i<=d1, j<=d2} 1/(2(i+j+1)) + (m - (d1+d2)/2) log 2."""
    if d1 < 0 or d2 < 0 or m < 0:
        raise InvalidInputError("C0 needs nonnegative arguments")
    rat = sum((Fraction(1, 2 * (i + j + 1)) for i in range(d1 + 1) for j in range(d2 + 1)), Fraction(0))
    l2 = Fraction(m) - Fraction(d1 + d2, 2)
    with mpmath.workdps(DPS):
        val = float(_mpf(rat) + _mpf(l2) * mpmath.log(2))
    return BezoutConstant(rat, l2, val)


def C0_rigorous(N: int) -> BezoutConstant:
    """Bezout constant for a curve (dim 1) against a hypersurface (dim N-1) in P^{3^N - 1}."""
    return bezout_C0(1, N - 1, 3**N - 1)


def C0_packaged(N: int) -> float:
    """(H_N + log 2 (2(3^N - 1) - N)) / 2."""
    with mpmath.workdps(DPS):
        return float((_mpf(harmonic(N)) + mpmath.log(2) * (2 * (3**N - 1) - N)) / 2)


# entries measured in nats; the rest are dimensionless multipliers
NATS_KEYS = frozenset({
    "C0", "C0_packaged", "C5", "gamma", "c2_sharp", "c2_sharp_packaged", "c2_simple",
    "bound_pipeline", "bound_closed_form", "bound_packaged_C0", "projected_transverse_bound",
    "h2C_bound", "h_W(p)", "published_intermediate_bound", "published_final_bound",
})


@dataclass
class Entry:
    value: object  # mpf or float
    provenance: str
    unit: str = "nats"


@dataclass
class ConstantsTable:
    N: int
    r: int
    entries: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.entries[key].value

    def add(self, key, value, provenance):
        self.entries[key] = Entry(value, provenance, "nats" if key in NATS_KEYS else "1")


def _check_rel(a, b, tol, what):
    a, b = _mpf(a), _mpf(b)
    if abs(a - b) > tol * max(abs(a), abs(b)):
        raise AssertionError(f"{what}: {mpmath.nstr(a, 15)} != {mpmath.nstr(b, 15)}")


def sharp_constants(N: int, r: int, s: int = 1, m_rank: int | None = None,
                    order: CMOrder | None = None, C_E: float = 0.0) -> ConstantsTable:
    """All constants of the transverse bound for (N, r), with identity checks."""
    order = order or CMOrder(None)
    if r < 0 or r >= N:
        raise InvalidInputError(f"need 0 <= r <= N-1, got N={N}, r={r}")
    if not 1 <= s <= N:
        raise InvalidInputError("need 1 <= s <= N")
    m = r if m_rank is None else m_rank
    dk = order.abs_DK
    t = ConstantsTable(N, r)
    with mpmath.workdps(DPS):
        c0 = C0_rigorous(N)
        t.add("C0", c0.value, RIGOROUS)
        t.add("C0_packaged", C0_packaged(N), PACKAGED)
        t.add("H_N", float(harmonic(N)), "formula")
        t.add("omega_2(N-1)", float(omega2_monomial(N - 1).value()), "formula")
        t.add("omega_2", math.pi, "formula")
        t.add("C1", C1(N, s), "formula")
        t.add("C3", gnum.C3(N, s), "formula")
        t.add("C5", gnum.C5(N, s, C_E), "formula")
        if m >= 1:
            t.add("C2", float(gnum.C2(m)), "formula")
            t.add("C4", gnum.C4(N, s, m), "formula")
        alpha = alpha_monomial(N)
        t.add("alpha", alpha.value(dk), "formula")
        t.add("gamma", N * N * _mpf(C_E) * alpha.value(dk), "formula")
        c1 = c1_monomial(N, r)
        c1v = c1.value()
        t.add("c1_sharp", c1v, "closed-form")
        t.add("c2_sharp", c1v * (N * N * _mpf(C_E) + _mpf(c0.value)), RIGOROUS)
        t.add("c2_sharp_packaged", c1v * (N * N * _mpf(C_E) + _mpf(C0_packaged(N))), PACKAGED)
        cs = c1_simple_monomial(N, r).value()
        t.add("c1_simple", cs, "closed-form")
        t.add("c2_simple", cs * (3**N + N * N * _mpf(C_E)), "closed-form")
        t.add("dk_exponent", float(dk_exponent(N, r)), "exact")
        delta = delta_monomial(N, r)
        t.add("delta", delta.value(dk), "pipeline")
        if r >= 1:
            beta = beta_monomial(N, r)
            t.add("beta", beta.value(dk), "formula")
            # identities, first exactly on exponents and then numerically
            if delta.dk_exponent() != dk_exponent(N, r):
                raise AssertionError("|D_K| exponent of the pipeline is off")
            if delta.without_dk() != c1:
                raise AssertionError("pipeline constant differs from c1")
            if beta != C4_monomial(N, 1, r) * Monomial.base("DK", Fraction(N, 2) + 3):
                raise AssertionError("beta != C4(N,1,r) |D_K|^(N/2+3)")
            _check_rel(t["beta"], gnum.C4(N, 1, r) * _mpf(dk) ** (_mpf(N) / 2 + 3), 1e-9, "beta vs C4")
            _check_rel(t["delta"], c1v * _mpf(dk) ** _mpf(dk_exponent(N, r)), 1e-9, "delta vs c1")
        if alpha != Monomial.integer(gnum.C3(N, 1)) * Monomial.base("DK", 1):
            raise AssertionError("alpha != C3(N,1) |D_K|")
        if C_E:
            _check_rel(t["gamma"], gnum.C5(N, 1, C_E) * dk, 1e-9, "gamma vs C5")
    return t


# ---------------------------------------------------------------------------
# curve data and reports


@dataclass
class CurveDescriptor:
    N: int
    degC: int
    h2C: float
    hC: float = 0.0
    tC: int | None = None
    rC: int | None = None
    r: int = 1
    cm: CMOrder = field(default_factory=CMOrder)
    curve_E: EllipticCurveQ | None = None
    poly: list | None = None

    def __post_init__(self):
        if self.tC is None:
            self.tC = self.N
        if self.rC is None:
            self.rC = self.N
        if not isinstance(self.N, int) or self.N < 1:
            raise InvalidInputError("N must be a positive integer")
        if not 1 <= self.tC <= self.N or not self.tC <= self.rC <= self.N:
            raise InvalidInputError("need 1 <= tC <= rC <= N")
        if self.degC < 1:
            raise InvalidInputError("deg C must be positive")
        if self.h2C < 0 or self.hC < 0:
            raise InvalidInputError("curve heights must be nonnegative")
        if self.r < 0:
            raise InvalidInputError("rank must be nonnegative")
        if self.curve_E is None:
            raise InvalidInputError("an elliptic curve is required")

    @property
    def C_E(self) -> float:
        return self.curve_E.C_E


@dataclass
class BoundReport:
    bound_nats: object
    trace: ConstantsTable
    branch: str
    warnings: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)


def _c0_warning(N):
    rig, pk = C0_rigorous(N).value, C0_packaged(N)
    return (f"C0 discrepancy at N={N}: arithmetic Bezout constant C0(1,{N - 1},{3**N - 1}) = {rig:.6f} "
            f"is used; the packaged value (H_N + log2(2(3^N-1)-N))/2 = {pk:.6f} is reported alongside")


def _transverse_core(N, r, degC, h2C, order, C_E):
    """(closed form, pipeline, T, table) for the transverse bound, unguarded."""
    t = sharp_constants(N, r, 1, r, order, C_E)
    dk = order.abs_DK
    with mpmath.workdps(DPS):
        deg = _mpf(degC)
        h2 = _mpf(h2C)
        ce = _mpf(C_E)
        alpha, gamma = t["alpha"], t["gamma"]
        c0 = _mpf(t["C0"])
        if r == 0:
            T = mpmath.mpf(1)
        else:
            T = (_mpf(Fraction(N, N - 1)) * t["beta"] * deg) ** (_mpf(r) / (N - r))
        pipeline = N * h2 * alpha * T + N * (gamma + c0 * alpha) * T * deg + N * N * ce
        e = _mpf(dk_exponent(N, r))
        closed = _mpf(dk) ** e * (
            t["c1_sharp"] * h2 * deg ** (_mpf(r) / (N - r)) + t["c2_sharp"] * deg ** (_mpf(N) / (N - r))
        ) + N * N * ce
        packaged = _mpf(dk) ** e * (
            t["c1_sharp"] * h2 * deg ** (_mpf(r) / (N - r)) + t["c2_sharp_packaged"] * deg ** (_mpf(N) / (N - r))
        ) + N * N * ce
    t.add("T", T, "pipeline")
    t.add("bound_pipeline", pipeline, "pipeline")
    t.add("bound_closed_form", closed, "closed-form")
    t.add("bound_packaged_C0", packaged, PACKAGED)
    if r >= 1:
        _check_rel(closed, pipeline, 1e-9, "closed form vs pipeline")
    return closed, pipeline, T, t


def transverse_bound(desc: CurveDescriptor) -> BoundReport:
    """Height bound for points of rank r <= N-1 on a transverse curve in E^N.

    For r = 0 the pipeline with T = 1 is the bound; the closed form is only
    an upper estimate there and is kept in the trace.
    """
    N, r = desc.N, desc.r
    if r > N - 1:
        raise InvalidInputError(f"transverse bound needs r <= N-1 (N={N}, r={r})")
    closed, pipeline, _, t = _transverse_core(N, r, desc.degC, desc.h2C, desc.cm, desc.C_E)
    raw = closed if r >= 1 else pipeline
    warnings = []
    if N >= 2:
        warnings.append(_c0_warning(N))
    if r == 0:
        warnings.append("rank 0: bound from the T = 1 pipeline; closed form kept in the trace")
    return BoundReport(raw * GUARD, t, "transverse", warnings)


def general_bound(desc: CurveDescriptor) -> BoundReport:
    """Bound for a curve of genus >= 2 via its minimal translate of dimension tC."""
    N, r, tC, rC = desc.N, desc.r, desc.tC, desc.rC
    if r >= max(rC - tC, tC):
        raise OutOfTheoremRangeError(
            f"rank r={r} is not below max(rC - tC, tC) = {max(rC - tC, tC)}"
        )
    if rC - tC >= tC:
        t = ConstantsTable(N, r)
        return BoundReport(None, t, "empty-certificate", [
            f"no points of rank < {rC - tC} lie on the curve; nothing to bound for r={r}"
        ])
    closed, pipeline, _, t = _transverse_core(tC, r, desc.degC, desc.h2C, desc.cm, desc.C_E)
    core = closed if r >= 1 else pipeline
    with mpmath.workdps(DPS):
        raw = (N - r) * core + _mpf(desc.hC) / desc.degC
    t.add("projected_transverse_bound", core, "pipeline")
    warnings = [_c0_warning(tC)] if tC >= 2 else []
    return BoundReport(raw * GUARD, t, "general", warnings)


def _poly_coeffs(p):
    coeffs = [to_mpq(c) for c in p]
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    if len(coeffs) < 2:
        raise InvalidInputError("p must be a nonconstant polynomial")
    return coeffs


def poly_curve_bound(E: EllipticCurveQ, order: CMOrder, p) -> BoundReport:
    """Bound for the curve p(x1) = y2 in E^2 (coefficients p0, ..., pn)."""
    coeffs = _poly_coeffs(p)
    n = len(coeffs) - 1
    m = sum(1 for c in coeffs if c != 0)
    hWp = weil_height([1] + coeffs).value
    C_E = E.C_E
    degC = 6 * n + 9
    h2C = 6 * (2 * n + 3) * (hWp + math.log(m) + 2 * C_E)
    desc = CurveDescriptor(2, degC, h2C, 0.0, 2, 2, 1, order, E, coeffs)
    rep = transverse_bound(desc)
    dk = order.abs_DK
    with mpmath.workdps(DPS):
        scale = _mpf(dk) ** 5 * (hWp + math.log(m) + 4 * C_E) * (2 * n + 3) ** 2
        K = (rep.bound_nats - 4 * C_E) / scale
        published_shape = _mpf(dk) ** 5 * mpmath.mpf(2) ** 41 * 3**4 * (
            h2C * degC + (4 * C_E + PUBLISHED_C0_N2) * degC**2
        ) + 4 * C_E
        published_final = PUBLISHED_POLY_COEFF * scale + 4 * C_E
    rep.branch = "poly-family"
    rep.trace.add("degC", degC, "formula")
    rep.trace.add("h2C_bound", h2C, "formula")
    rep.trace.add("h_W(p)", hWp, "formula")
    rep.trace.add("K", K, "derived")
    rep.trace.add("published_intermediate_bound", published_shape, PACKAGED)
    rep.trace.add("published_final_bound", published_final, PACKAGED)
    rep.extras.update({"n": n, "m": m, "K": K})
    rep.warnings.append(
        f"polynomial-family coefficient: recomputed K = {mpmath.nstr(K, 6)} vs published 2e14 "
        f"(ratio {mpmath.nstr(K / PUBLISHED_POLY_COEFF, 4)}); the recomputed bound is the one used"
    )
    j = E.j
    if not order.is_cm and j in (0, 1728):
        want = -3 if j == 0 else -1
        rep.warnings.append(f"j = {j} means E has CM by Q(sqrt({want})) but a non-CM order was given")
    if order.is_cm and j == 0 and order.D != -3 or order.is_cm and j == 1728 and order.D != -1:
        rep.warnings.append(f"order {order} does not match j = {j}")
    return rep


# ---------------------------------------------------------------------------
# comparison with the simplified constants


@dataclass
class SharpnessRow:
    N: int
    r: int
    c1_sharp: object
    c1_simple: object
    c2_sharp: object
    c2_simple: object

    @property
    def c1_ok(self) -> bool:
        return self.c1_sharp < self.c1_simple

    @property
    def c2_ok(self) -> bool:
        return self.c2_sharp < self.c2_simple


def sharpness_compare(N: int, r: int, order: CMOrder | None = None, C_E: float = 4.0) -> SharpnessRow:
    """c1, c2 of the transverse bound against the simplified ones."""
    if not 1 <= r < N <= 8:
        raise InvalidInputError("need 1 <= r < N <= 8")
    t = sharp_constants(N, r, 1, r, order, C_E)
    return SharpnessRow(N, r, t["c1_sharp"], t["c1_simple"], t["c2_sharp"], t["c2_simple"])


def sharpness_table(N_max: int = 6, order: CMOrder | None = None, C_E: float = 4.0) -> list:
    return [sharpness_compare(N, r, order, C_E) for N in range(2, N_max + 1) for r in range(1, N)]

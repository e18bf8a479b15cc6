"""Small exact-arithmetic helpers: rational parsing and heights of rationals."""
from __future__ import annotations

import math
from fractions import Fraction

import gmpy2
from gmpy2 import mpq, mpz

from .errors import InvalidInputError


def to_mpq(value) -> mpq:
    """Convert int, Fraction, mpq or a ``"num/den"`` string to an exact ``mpq``."""
    if isinstance(value, bool):
        raise InvalidInputError(f"not a rational number: {value!r}")
    if isinstance(value, type(mpq())):
        return value
    if isinstance(value, (int, type(mpz()))):
        return mpq(value)
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, str):
        text = value.strip()
        try:
            if "/" in text:
                num, den = text.split("/")
                den_i = int(den)
                if den_i == 0:
                    raise InvalidInputError(f"zero denominator in {value!r}")
                return mpq(int(num), den_i)
            return mpq(int(text))
        except ValueError as exc:
            raise InvalidInputError(f"cannot parse rational {value!r}") from exc
    if isinstance(value, float):
        raise InvalidInputError("floats are not accepted as exact rationals; pass a string or Fraction")
    raise InvalidInputError(f"cannot interpret {value!r} as a rational number")


def to_fraction(value) -> Fraction:
    q = to_mpq(value)
    return Fraction(int(q.numerator), int(q.denominator))


def rational_str(q) -> str:
    q = to_mpq(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def primitive_integer_vector(coords) -> list:
    """Scale rationals to coprime integers (sign of the first nonzero entry kept)."""
    qs = [to_mpq(c) for c in coords]
    den = mpz(1)
    for q in qs:
        den = gmpy2.lcm(den, q.denominator)
    ints = [mpz(q * den) for q in qs]
    g = mpz(0)
    for v in ints:
        g = gmpy2.gcd(g, v)
    if g == 0:
        raise InvalidInputError("all coordinates are zero")
    return [v // g for v in ints]


def log_int(n) -> float:
    """Natural log of a positive (possibly huge) integer."""
    n = int(n)
    if n <= 0:
        raise ValueError("log of non-positive integer")
    bits = n.bit_length()
    if bits < 1000:
        return math.log(n)
    shift = bits - 60
    return math.log(n >> shift) + shift * math.log(2)


def weil_height_rational(q) -> float:
    """h_W(q) = h_W(1 : q) = log max(|num|, |den|)."""
    q = to_mpq(q)
    if q == 0:
        return 0.0
    return log_int(max(abs(q.numerator), q.denominator))

"""Exact rationals, correctly rounded binary floats and precision contexts.

Rationals are ``gmpy2.mpq`` (always in lowest terms, positive denominator).
Floats are ``gmpy2.mpfr``; MPFR rounds every elementary operation and
function (including ``asinh``, ``sinh``, ``tanh`` and pi) correctly to the
working precision.  gmpy2 rounds to whatever context is active, so every
routine here that produces a float enters ``ctx.scope()`` first.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from math import factorial

import gmpy2
from gmpy2 import mpfr, mpq

from .errors import InputError, NonPositiveEps

Rational = type(mpq(0))
BigFloat = type(mpfr(0))

MIN_BITS = 64
BITS_ENV = "SEPLAB_BITS"


@dataclass(frozen=True)
class PrecisionContext:
    """Mantissa width for every float operation performed under it."""

    bits: int

    def __post_init__(self):
        if not isinstance(self.bits, int) or self.bits < MIN_BITS:
            raise InputError(f"precision must be an integer >= {MIN_BITS} bits, got {self.bits!r}")

    def scope(self):
        """Context manager making this precision the active rounding context."""
        return gmpy2.context(gmpy2.get_context(), precision=self.bits, round=gmpy2.RoundToNearest)

    def widened(self, extra: int) -> "PrecisionContext":
        return PrecisionContext(self.bits + extra)

    def ulp(self, x) -> BigFloat:
        """Unit in the last place of ``x`` at this precision (2^-bits for x = 0)."""
        with self.scope():
            x = mpfr(x)
            if x == 0:
                return gmpy2.exp2(-self.bits)
            e, _ = gmpy2.frexp(x)
            return gmpy2.exp2(e - self.bits)


def rational(x) -> Rational:
    """Exact conversion of int, str ("p/q" or decimal) or Fraction to a rational."""
    if isinstance(x, float):
        raise InputError("floats are not accepted as exact rationals; pass a string")
    return mpq(x)


def to_big(x, ctx: PrecisionContext) -> BigFloat:
    """Round ``x`` (int, rational, decimal string or float) to ``ctx`` precision."""
    with ctx.scope():
        return mpfr(x, ctx.bits)


def pi_const(ctx: PrecisionContext) -> BigFloat:
    return gmpy2.const_pi(ctx.bits)


def d_from_eps(eps, ctx: PrecisionContext) -> BigFloat:
    """The coupling parameter d with eps = sinh(2d)/2, i.e. d = asinh(2 eps)/2."""
    with ctx.scope():
        e = mpfr(eps, ctx.bits)
        if not e > 0:
            raise NonPositiveEps(f"eps must be positive, got {eps}")
        return gmpy2.asinh(2 * e) / 2


def eps_from_d(d, ctx: PrecisionContext) -> BigFloat:
    with ctx.scope():
        return gmpy2.sinh(2 * mpfr(d, ctx.bits)) / 2


def eps_series_coeffs(order: int) -> list:
    """Coefficients c_0..c_order of eps = sinh(2d)/2 as a power series in d.

    c_k = 2^(k-1)/k! for odd k and 0 for even k.
    """
    if order < 1:
        raise InputError("order must be >= 1")
    return [mpq(2 ** (k - 1), factorial(k)) if k % 2 else mpq(0) for k in range(order + 1)]


def default_bits(eps) -> int:
    """Working precision for splitting work at ``eps``.

    Keeps roughly 1.5x the bits lost to the exp(-pi^2/(2 eps)) scale plus a
    64-bit guard, never below 192.  ``SEPLAB_BITS`` in the environment wins.
    """
    override = os.environ.get(BITS_ENV)
    if override:
        bits = int(override)
        PrecisionContext(bits)
        return bits
    e = float(eps)
    if not e > 0:
        raise NonPositiveEps(f"eps must be positive, got {eps}")
    return max(192, math.ceil(1.5 * (math.pi ** 2 / (2 * e)) / math.log(2)) + 64)


def fmt_hex(x) -> str:
    """Exact hexadecimal rendering of a float, parseable by ``parse_hex``."""
    return format(x, "a")


def parse_hex(s: str, ctx: PrecisionContext) -> BigFloat:
    return mpfr(s, ctx.bits, 16)


def fmt_decimal(x, digits: int) -> str:
    """Scientific notation with ``digits`` significant digits, round-to-nearest.

    gmpy2's own ``e`` presentation type is unreliable, so the string is assembled
    from ``digits()``; the output does not depend on locale.
    """
    if gmpy2.is_nan(x):
        return "nan"
    if gmpy2.is_infinite(x):
        return "inf" if x > 0 else "-inf"
    if x == 0:
        return "0." + "0" * (digits - 1) + "e+00"
    mant, exp, _ = x.digits(10, digits)
    sign = ""
    if mant.startswith("-"):
        sign, mant = "-", mant[1:]
    e = exp - 1
    return f"{sign}{mant[0]}.{mant[1:]}e{'+' if e >= 0 else '-'}{abs(e):02d}"


def fmt_rational(q) -> str:
    q = mpq(q)
    return f"{q.numerator}/{q.denominator}"


def parse_rational(s: str) -> Rational:
    num, sep, den = s.partition("/")
    if not sep:
        raise InputError(f"expected 'numerator/denominator', got {s!r}")
    return mpq(int(num), int(den))

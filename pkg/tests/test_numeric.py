from fractions import Fraction

import gmpy2
import mpmath
import pytest
import sympy
from gmpy2 import mpfr, mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from seplab.errors import InputError, NonPositiveEps
from seplab.numeric import (BITS_ENV, PrecisionContext, d_from_eps, default_bits,
                            eps_from_d, eps_series_coeffs, fmt_decimal, fmt_hex,
                            fmt_rational, parse_hex, parse_rational, pi_const, rational,
                            to_big)

rationals = st.fractions(max_denominator=10 ** 6).map(mpq)


def test_context_rejects_low_precision():
    with pytest.raises(InputError):
        PrecisionContext(32)
    assert PrecisionContext(64).widened(10).bits == 74


def test_ulp():
    ctx = PrecisionContext(100)
    assert ctx.ulp(1) == gmpy2.exp2(-99)
    assert ctx.ulp(0) == gmpy2.exp2(-100)


def test_rational_refuses_floats():
    with pytest.raises(InputError):
        rational(0.1)
    assert rational("3/6") == mpq(1, 2)
    assert rational(Fraction(2, 4)) == mpq(1, 2)


@given(rationals, rationals, rationals)
def test_rational_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a * (b + c) == a * b + a * c
    assert a - a == 0
    if a:
        assert a * (1 / a) == 1


@given(rationals)
def test_rational_text_round_trip(q):
    assert parse_rational(fmt_rational(q)) == q


@given(rationals, st.sampled_from([64, 128, 300]))
def test_conversion_is_correctly_rounded(q, bits):
    ctx = PrecisionContext(bits)
    x = to_big(q, ctx)
    # half an ulp, checked exactly in rationals
    assert abs(mpq(x) - q) <= mpq(ctx.ulp(x)) / 2


def test_pi_against_mpmath():
    ctx = PrecisionContext(400)
    with mpmath.workprec(450):
        ref = mpmath.pi
        assert abs(mpmath.mpf(str(pi_const(ctx))) - ref) < mpmath.mpf(2) ** -390


def test_d_from_eps_oracle():
    ctx = PrecisionContext(256)
    with mpmath.workdps(90):
        ref = mpmath.asinh(mpmath.mpf("0.2")) / 2
        got = mpmath.mpf(fmt_decimal(d_from_eps("0.1", ctx), 80))
        assert abs(got - ref) < mpmath.mpf(10) ** -75


def test_d_from_eps_small_limit():
    ctx = PrecisionContext(128)
    with ctx.scope():
        r = d_from_eps("1e-20", ctx) / mpfr("1e-20")
        assert abs(r - 1) < mpfr("1e-30")


@pytest.mark.parametrize("eps", ["0", "-0.1"])
def test_d_from_eps_nonpositive(eps):
    with pytest.raises(NonPositiveEps):
        d_from_eps(eps, PrecisionContext(128))


@settings(max_examples=50)
@given(st.floats(min_value=1e-6, max_value=10), st.floats(min_value=1e-6, max_value=10))
def test_d_from_eps_monotone_and_inverse(a, b):
    ctx = PrecisionContext(160)
    da, db = d_from_eps(a, ctx), d_from_eps(b, ctx)
    if a < b:
        assert da < db
    with ctx.scope():
        back = eps_from_d(da, ctx)
        assert abs(back - mpfr(a, 160)) <= 8 * ctx.ulp(back)


def test_eps_series_matches_sympy():
    d = sympy.symbols("d")
    ser = sympy.series(sympy.sinh(2 * d) / 2, d, 0, 16).removeO()
    ref = [sympy.Rational(ser.coeff(d, k)) for k in range(16)]
    got = eps_series_coeffs(15)
    assert [Fraction(int(c.numerator), int(c.denominator)) for c in got] == \
        [Fraction(int(r.p), int(r.q)) for r in ref]
    assert got[3] == mpq(2, 3) and got[5] == mpq(2, 15)


def test_eps_series_order_validation():
    with pytest.raises(InputError):
        eps_series_coeffs(0)


def test_default_bits(monkeypatch):
    monkeypatch.delenv(BITS_ENV, raising=False)
    assert default_bits("0.5") == 192
    assert default_bits("0.05") == 278
    monkeypatch.setenv(BITS_ENV, "300")
    assert default_bits("0.05") == 300


def test_hex_round_trip():
    ctx = PrecisionContext(200)
    with ctx.scope():
        x = mpfr(1, 200) / 3
        y = -x
    assert parse_hex(fmt_hex(x), ctx) == x
    assert parse_hex(fmt_hex(y), ctx) == y


def test_fmt_decimal():
    ctx = PrecisionContext(128)
    with ctx.scope():
        assert fmt_decimal(mpfr(1) / 3, 5) == "3.3333e-01"
        assert fmt_decimal(mpfr(-12345), 3) == "-1.23e+04"
        assert fmt_decimal(mpfr(0), 3) == "0.00e+00"
        assert fmt_decimal(mpfr("inf"), 3) == "inf"

import random
from fractions import Fraction
from math import factorial

import mpmath
import pytest
from gmpy2 import mpfr, mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from seplab import alpha as al
from seplab.acceptance import random_class_q
from seplab.errors import EmptyInput, InputError, InsufficientOrder, StructureFailure
from seplab.numeric import PrecisionContext, pi_const
from seplab.series import compute_formal_solution


def test_low_order_structure(ds81):
    F, G, E = ds81.F, ds81.G, ds81.E
    assert F.valuation() == 7
    assert G.valuation() == 9
    assert E.valuation() == 9
    assert E.is_odd_in_d()
    assert all(p.is_odd() for p in E)


def test_q8_alternative_breaks_endpoint_vanishing():
    sol = compute_formal_solution(20)
    with pytest.raises(StructureFailure, match="Q_8"):
        al.build_derived_series(sol, 21, q8_leading=mpq(47, 6))


def test_order_precondition():
    sol = compute_formal_solution(10)
    assert al.build_derived_series(sol).order == 11
    with pytest.raises(InputError):
        al.build_derived_series(sol, 12)


def test_first_rows(table81):
    r7, r9 = table81.row(7), table81.row(9)
    assert r7.alpha_n == 0 and r7.e_lead == 0
    assert r9.e_lead == mpq(62, 3)
    with mpmath.workdps(60):
        ref = mpmath.mpf(62) / 3 * mpmath.pi ** 8 / factorial(8)
        assert abs(mpmath.mpf(str(r9.alpha_n)) - ref) < mpmath.mpf(10) ** -50
    assert abs(float(r9.alpha_n) - 4.86349969408379) < 1e-13
    with pytest.raises(KeyError):
        table81.row(83)


def test_hat_leading_matches_tau_coefficient(ds81, table81):
    hat = dict(al.hat_leading(ds81))
    for r in table81.rows:
        assert hat[r.n] == r.e_lead


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=10 ** 6))
def test_hat_is_multiplicative(seed):
    rng = random.Random(seed)
    x, y = random_class_q(rng, 8), random_class_q(rng, 8)
    hx, hy, hxy = x.hat(), y.hat(), (x * y).hat()
    for n in range(9):
        assert hxy[n] == sum(hx[i] * hy[n - i] for i in range(n + 1))


def test_estimate_value_and_convergence(table81):
    ctx = PrecisionContext(256)
    est = al.alpha_estimate(table81, 81, ctx)
    assert abs(float(est.value) - 1.4691744912794705) < 1e-15
    assert est.lower < est.value < est.upper
    assert not est.contains(mpfr("1.264150331"))
    start9 = al.alpha_estimate(table81, 81, ctx, start=9)
    assert start9.value == est.value
    # every later partial sum stays inside the earlier tail bound
    for N in (41, 61):
        early = al.alpha_estimate(table81, N, ctx)
        with ctx.scope():
            assert abs(est.value - early.value) <= early.tail


def test_precision_agreement():
    ds = al.build_derived_series(compute_formal_solution(40), 41)
    a = al.extract_alpha_coeffs(ds, PrecisionContext(128))
    b = al.extract_alpha_coeffs(ds, PrecisionContext(256))
    with PrecisionContext(256).scope():
        assert abs(a.alpha_estimate - b.alpha_estimate) < mpfr(2) ** -120


def test_tail_bound_exact():
    den = 1
    for j in range(8):
        den *= 81 - j
    exact = Fraction(762333542, den)
    got = al.tail_bound(81, PrecisionContext(128))
    assert abs(Fraction(mpq(got)) - exact) < Fraction(1, 10 ** 40)
    assert 5.87e-7 < float(exact) < 5.89e-7


def test_decay_bound_profile(table81):
    ctx = PrecisionContext(256)
    ratios = {r.n: abs(r.alpha_n) / al.decay_bound(r.n, ctx) for r in table81.rows if r.n >= 9}
    # the n = 9 constant is the true value cut short; all later terms sit well inside
    assert 1 < ratios[9] < 1 + 1e-7
    assert max(v for n, v in ratios.items() if n >= 11) < 0.46


def test_hat_norm(ds81):
    ctx = PrecisionContext(256)
    entries = [(n, x) for n, x in al.hat_leading(ds81) if 9 <= n <= 79 and n % 2]
    sup = al.hat_norm(entries, 9, 7, ctx)
    with mpmath.workdps(40):
        ref = mpmath.mpf(31) / 3 * mpmath.pi ** 9
        assert abs(mpmath.mpf(str(sup)) - ref) < mpmath.mpf(10) ** -30


def test_hat_norm_examples():
    ctx = PrecisionContext(128)
    one = al.hat_norm([(5, mpq(factorial(4)))], 5, 1, ctx)
    with ctx.scope():
        assert abs(one / pi_const(ctx) ** 5 - 1) < mpfr(2) ** -120
        a = al.hat_norm([(3, 1), (5, -2)], 3, 0, ctx)
        b = al.hat_norm([(3, 3), (5, -6)], 3, 0, ctx)
        assert abs(b - 3 * a) <= 4 * ctx.ulp(b)
    with pytest.raises(EmptyInput):
        al.hat_norm([], 3, 0, ctx)
    with pytest.raises(InputError):
        al.hat_norm([(4, 1)], 3, 0, ctx)
    with pytest.raises(InputError):
        al.hat_norm([(5, 1)], 3, 3, ctx)


def test_smoothed_gevrey_profile(ds81):
    prof = al.smoothed_gevrey_profile(ds81, PrecisionContext(128))
    vals = dict(prof)
    assert max(vals.values()) < 6.2e6
    tail = [v for n, v in prof if n >= 23]
    assert all(a > b for a, b in zip(tail, tail[1:]))


def test_beta_decay(table81):
    prof = [(k, v) for k, v in al.beta_decay_profile(table81) if k >= 13]
    assert all(v <= 3.3e4 for _, v in prof)
    tail = [v for k, v in prof if k >= 17]
    assert all(a > b for a, b in zip(tail, tail[1:]))


def test_insufficient_orders():
    ds = al.build_derived_series(compute_formal_solution(6), 7)
    with pytest.raises(InsufficientOrder):
        al.extract_alpha_coeffs(ds)
    table = al.compute_alpha_table(13)
    assert table.alpha_estimate is None
    with pytest.raises(InsufficientOrder):
        al.alpha_estimate(table, 13, PrecisionContext(128))
    for bad in (8, 7):
        with pytest.raises(InputError):
            al.compute_alpha_table(bad)

import json

import mpmath
import pytest
import sympy
from gmpy2 import mpfr, mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from seplab.errors import DivisibilityFailure, InputError, OrderMismatch, TruncationTooLarge
from seplab.numeric import PrecisionContext
from seplab.poly import U, UPoly, tau_basis
from seplab.series import (DSeries, FormalSolution, _check_double_roots, apply_f_of_dD,
                           compute_formal_solution, evaluate_A, gevrey_profile, op_C, op_C2,
                           op_C_inverse, op_exp, op_S, op_S2, residual_of_equation,
                           sech_half_coeffs, series_reciprocal, t_minus_series, t_plus_series)


def _frac(q):
    return sympy.Rational(int(q.numerator), int(q.denominator))


def _sym(p, u):
    return sum(_frac(c) * u ** i for i, c in enumerate(p.coeffs))


small = st.fractions(max_denominator=9, min_value=-9, max_value=9).map(mpq)


@st.composite
def class_q(draw, order=8):
    return DSeries([UPoly(draw(st.lists(small, min_size=n + 1, max_size=n + 1)))
                    for n in range(order + 1)])


def test_table_values():
    sol = compute_formal_solution(6)
    one_minus = UPoly([1, 0, -1])
    assert sol.A(1) == U
    assert sol.A(3) == UPoly([0, 1, 0, -1])
    assert sol.A(5) == one_minus * UPoly([0, mpq(4, 3), 0, mpq(-10, 3)])
    assert sol.A(7) == one_minus * UPoly([0, mpq(182, 45), 0, mpq(-190, 9), 0, mpq(62, 3)])


def test_order_validation():
    for bad in (-2, 3):
        with pytest.raises(InputError):
            compute_formal_solution(bad)
    with pytest.raises(InputError):
        compute_formal_solution(4).A(9)


def test_residual_vanishes():
    res = residual_of_equation(compute_formal_solution(40))
    assert res.order == 41
    assert all(not p for p in res)


def test_corrupted_coefficient_is_detected():
    sol = compute_formal_solution(10)
    polys = list(sol.polys)
    polys[2] = polys[2] + UPoly([0, mpq(1, 1000)])
    res = residual_of_equation(FormalSolution(10, tuple(polys)))
    assert res.valuation() == 5


def test_double_root_check():
    with pytest.raises(DivisibilityFailure):
        _check_double_roots(UPoly([1, 0, -1]), 3)
    assert _check_double_roots(UPoly([1, 0, -1]) ** 2, 3) == UPoly([1])


def test_invariants_at_order_80(sol80):
    for k, p in enumerate(sol80.polys):
        assert p.is_odd() and p.degree <= 2 * k + 1
        if k:
            assert not p(mpq(1)) and not p(mpq(-1))


def test_residual_scaling_oracle():
    # truncating at d^6 leaves a residual of order d^9 in the difference equation
    sol = compute_formal_solution(6)
    with mpmath.workdps(60):
        def residual(d):
            eps = mpmath.sinh(2 * d) / 2
            z = mpmath.mpf("0.3")

            def y(zz):
                u = mpmath.tanh(zz)
                return sum(sum(mpmath.mpf(int(c.numerator)) / int(c.denominator) * u ** i
                               for i, c in enumerate(p.coeffs)) * d ** (2 * k)
                           for k, p in enumerate(sol.polys))
            return y(z + d) - y(z - d) - 2 * eps * (1 - y(z) ** 2)

        r1, r2 = residual(mpmath.mpf("0.01")), residual(mpmath.mpf("0.005"))
        assert abs(r1 / r2 - 512) < 5


def test_json_round_trip():
    sol = compute_formal_solution(12)
    text = sol.dumps()
    assert FormalSolution.loads(text) == sol
    doc = json.loads(text)
    assert doc["polys"][1] == ["0/1", "1/1", "0/1", "-1/1"]
    doc["order"] = 14
    with pytest.raises(InputError):
        FormalSolution.from_json(doc)


def test_evaluate_A():
    sol = compute_formal_solution(20)
    ctx = PrecisionContext(128)
    with ctx.scope():
        assert abs(evaluate_A(sol, 20, "0.2", 1, ctx) - mpfr("0.7631045114449392245694849338979736772636")) \
            < mpfr("1e-36")
    with mpmath.workdps(40):
        ref = mpmath.tanh(mpmath.asinh(mpmath.mpf("0.4")) / 2 / mpmath.mpf("0.2"))
        assert abs(mpmath.mpf(str(evaluate_A(sol, 0, "0.2", 1, ctx))) - ref) < mpmath.mpf(10) ** -35
    with pytest.raises(TruncationTooLarge):
        evaluate_A(sol, 22, "0.2", 1, ctx)


def test_series_ring_ops():
    a = DSeries([UPoly([1]), U])
    b = DSeries([U, UPoly([2]), UPoly([0, 0, 1])])
    prod = a * b
    assert prod.order == 1
    assert prod[1] == UPoly([2]) + U * U
    assert (a - a).valuation() is None
    assert a.truncate(0) == DSeries([UPoly([1])])


@settings(max_examples=30, deadline=None)
@given(class_q(), class_q())
def test_class_q_closure(x, y):
    assert (x + y).is_class_q()
    assert (x * y).is_class_q()
    for op in (op_C, op_S, op_C2, op_S2):
        assert op(x).is_class_q()


@settings(max_examples=20, deadline=None)
@given(class_q())
def test_operator_identities(x):
    assert op_C2(x) == 2 * op_C(op_C(x)) - x
    assert op_S2(x) == 2 * op_S(op_C(x))
    assert op_C_inverse(op_C(x)) == x
    assert op_C(op_C_inverse(x)) == x


def test_apply_f_needs_enough_coefficients():
    with pytest.raises(OrderMismatch):
        apply_f_of_dD([1, 0], DSeries([UPoly([1])] * 4))


def test_sech_half_against_sympy():
    z = sympy.symbols("z")
    ser = sympy.series(1 / sympy.cosh(z / 2), z, 0, 13).removeO()
    got = sech_half_coeffs(12)
    assert [_frac(c) for c in got] == [ser.coeff(z, k) for k in range(13)]
    assert got[2] == mpq(-1, 8)
    with pytest.raises(InputError):
        series_reciprocal([0, 1], 3)


def test_tanh_shift_series_against_sympy():
    u, d = sympy.symbols("u d")
    expr = (u + sympy.tanh(d)) / (1 + u * sympy.tanh(d))
    ser = sympy.expand(sympy.series(expr, d, 0, 13).removeO())
    tp = t_plus_series(12)
    tm = t_minus_series(12)
    shifted = op_exp(DSeries([U] + [UPoly()] * 12))
    for n in range(13):
        ref = sympy.expand(ser.coeff(d, n))
        assert sympy.expand(_sym(tp[n], u) - ref) == 0
        assert shifted[n] == tp[n]
        assert tm[n] == (tp[n] if n % 2 == 0 else -tp[n])
    assert tp[0] == tau_basis(1)[1]


def test_gevrey_profile_growth(sol80):
    prof = gevrey_profile(sol80, PrecisionContext(128))
    per_n = [(n, v / n) for n, v in prof]
    assert all(3.9 < r < 4.2 for n, r in per_n if n >= 15)
    tail = [r for n, r in per_n if n >= 27]
    assert all(a >= b for a, b in zip(tail, tail[1:]))

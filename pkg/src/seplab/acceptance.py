"""Acceptance criteria: each runs at its stated tolerance and reports pass or fail.

Criteria are grouped into suites: ``exact`` criteria use rational arithmetic
only, ``numeric`` ones involve binary floats.  Expensive shared inputs (the
order-80 formal solution and the alpha table) are computed once per process.
"""
from __future__ import annotations

import functools
import os
import random
import tempfile
import time
from dataclasses import dataclass
from typing import Callable

from gmpy2 import mpfr, mpq

from . import alpha as al
from .numeric import PrecisionContext, fmt_decimal
from .poly import UPoly, apply_D, norm_n
from .series import (DSeries, compute_formal_solution, op_C, op_C2, op_C_inverse, op_S,
                     op_S2, residual_of_equation)
from .splitting import (MapParams, Point2, SplittingLab, first_level_length, jacobian,
                        leading_amplitude, orbit, splitting_amplitude, step_Phi,
                        step_Phi_inv)

SEED = 20240611


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    suite: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:2d} {self.title}: {self.detail}"


@dataclass(frozen=True)
class Criterion:
    number: int
    title: str
    suite: str
    run: Callable[[], tuple]


@functools.lru_cache(maxsize=None)
def formal_solution(order: int):
    return compute_formal_solution(order)


@functools.lru_cache(maxsize=None)
def derived_series(order: int = 81):
    return al.build_derived_series(formal_solution(order - 1), order)


@functools.lru_cache(maxsize=None)
def alpha_table(order: int = 81, bits: int = al.ALPHA_BITS):
    return al.extract_alpha_coeffs(derived_series(order), PrecisionContext(bits))


def random_class_q(rng: random.Random, order: int) -> DSeries:
    coeffs = []
    for n in range(order + 1):
        coeffs.append(UPoly([mpq(rng.randint(-20, 20), rng.randint(1, 6)) for _ in range(n + 1)]))
    return DSeries(coeffs)


def _table_polys():
    table = {
        3: UPoly([0, 1, 0, -1]),
        5: UPoly([1, 0, -1]) * UPoly([0, mpq(4, 3), 0, mpq(-10, 3)]),
        7: UPoly([1, 0, -1]) * UPoly([0, mpq(182, 45), 0, mpq(-190, 9), 0, mpq(62, 3)]),
    }
    return table


def crit_table():
    t0 = time.perf_counter()
    sol = compute_formal_solution(6)
    elapsed = time.perf_counter() - t0
    bad = [n for n, p in _table_polys().items() if sol.A(n) != p]
    ok = not bad and elapsed < 1.0
    return ok, f"A_3, A_5, A_7 {'match' if not bad else 'differ at ' + str(bad)}; {elapsed:.3f} s"


def crit_residual():
    res = residual_of_equation(formal_solution(40))
    nonzero = [n for n, p in enumerate(res) if p]
    return (not nonzero and res.order == 41,
            f"residual through d^{res.order}: {'identically zero' if not nonzero else 'nonzero at ' + str(nonzero[:5])}")


def crit_endpoints():
    sol = formal_solution(80)
    bad = []
    for k, p in enumerate(sol.polys[:41]):
        if not p.is_odd() or (k and (p(mpq(1)) or p(mpq(-1)))):
            bad.append(2 * k + 1)
    return not bad, f"A_1..A_81 odd and vanishing at +-1" if not bad else f"violations at {bad}"


def crit_alpha():
    ctx = PrecisionContext(al.ALPHA_BITS)
    est = al.alpha_estimate(alpha_table(), 81, ctx)
    with ctx.scope():
        ref = mpfr(al.ALPHA_REFERENCE)
        lo, hi = (mpfr(s) for s in al.ALPHA_INTERVAL)
        dist = abs(est.value - ref)
        ok = dist <= mpfr("6e-7") and lo <= est.value <= hi
    return ok, (f"estimate {fmt_decimal(est.value, 12)} +- {fmt_decimal(est.tail, 3)} "
                f"vs {al.ALPHA_REFERENCE} (distance {fmt_decimal(dist, 3)}, interval "
                f"[{al.ALPHA_INTERVAL[0]}, {al.ALPHA_INTERVAL[1]}])")


def crit_decay():
    table = alpha_table()
    ctx = PrecisionContext(table.bits)
    bad = []
    worst = mpfr(0)
    for r in table.rows:
        if r.n < 9:
            continue
        bound = al.decay_bound(r.n, ctx)
        with ctx.scope():
            slack = 4 * ctx.ulp(bound)
            if abs(r.alpha_n) > bound + slack:
                bad.append(r.n)
            worst = max(worst, abs(r.alpha_n) / bound)
    return not bad, (f"max |alpha_n|/bound = {fmt_decimal(worst, 6)} over odd 9..81"
                     + (f"; violated at {bad}" if bad else ""))


def crit_hat_norm():
    ds = derived_series()
    ctx = PrecisionContext(al.ALPHA_BITS)
    entries = [(n, x) for n, x in al.hat_leading(ds) if 9 <= n <= 79 and n % 2]
    sup = al.hat_norm(entries, 9, 7, ctx)
    with ctx.scope():
        ok = sup <= mpfr(al.K0_BOUND)
    return ok, f"|x0|_(9,7) = {fmt_decimal(sup, 21)} vs bound {al.K0_BOUND}"


def crit_norms(samples: int = 500, degrees=range(3, 26)):
    rng = random.Random(SEED)
    ctx = PrecisionContext(128)
    fails1 = fails2 = 0
    count = 0
    for n in degrees:
        for _ in range(samples):
            p = UPoly([mpq(rng.randint(-50, 50), rng.randint(1, 9)) for _ in range(n + 1)])
            if p.is_zero():
                continue
            count += 1
            lhs = norm_n(apply_D(p), n + 1, ctx)
            rhs = norm_n(p, n, ctx)
            with ctx.scope():
                if lhs > n * rhs + 8 * ctx.ulp(max(lhs, n * rhs)):
                    fails1 += 1
            q = UPoly([c if k % 2 else 0 for k, c in enumerate(p.coeffs)])
            if q.is_zero():
                continue
            a = norm_n(q, n, ctx)
            b = norm_n(apply_D(q), n + 1, ctx)
            with ctx.scope():
                if a > b + 8 * ctx.ulp(max(a, b)):
                    fails2 += 1
    return (not fails1 and not fails2,
            f"{count} polynomials, degrees {degrees.start}..{degrees.stop - 1}: "
            f"{fails1} violations of ||Dp|| <= n||p||, {fails2} of ||p|| <= ||Dp|| (odd)")


def crit_operators(samples: int = 50, order: int = 16):
    rng = random.Random(SEED + 1)
    bad = 0
    for _ in range(samples):
        X = random_class_q(rng, order)
        if op_C2(X) != 2 * op_C(op_C(X)) - X:
            bad += 1
        elif op_S2(X) != 2 * op_S(op_C(X)):
            bad += 1
        elif op_C(op_C_inverse(X)) != X:
            bad += 1
    return not bad, f"{samples} random order-{order} series, {bad} identity failures"


def crit_map(points: int = 100):
    rng = random.Random(SEED + 2)
    params = MapParams.create("0.3", 192)
    ctx = params.ctx
    h = mpfr("1e-30", ctx.bits)
    det_worst = mpfr(0)
    rev_bad = 0
    with ctx.scope():
        tol = mpfr("1e-20")
        for _ in range(points):
            u = mpfr(rng.uniform(-1.5, 1.5))
            v = mpfr(rng.uniform(-1.5, 1.5))
            cols = []
            for du, dv in ((h, 0), (0, h)):
                fp = step_Phi(Point2(u + du, v + dv), params)
                fm = step_Phi(Point2(u - du, v - dv), params)
                cols.append(((fp.u - fm.u) / (2 * h), (fp.v - fm.v) / (2 * h)))
            det = cols[0][0] * cols[1][1] - cols[1][0] * cols[0][1]
            det_worst = max(det_worst, abs(det - 1))
            r = step_Phi(Point2(-v, -u), params)
            lhs = (-r.v, -r.u)
            inv = step_Phi_inv(Point2(u, v), params)
            for a, b in zip(lhs, (inv.u, inv.v)):
                if abs(a - b) > 8 * ctx.ulp(b):
                    rev_bad += 1
    fixed = all(_exact_Phi(p, mpq(3, 10)) == p for p in ((mpq(1), mpq(1)), (mpq(-1), mpq(-1))))
    j = jacobian(Point2(1, 1), params)
    with ctx.scope():
        tr_err = abs(j[0][0] + j[1][1] - (2 + 16 * params.eps ** 2))
    ok = det_worst <= tol and not rev_bad and fixed and tr_err <= 8 * ctx.ulp(2)
    return ok, (f"max |det - 1| = {fmt_decimal(det_worst, 3)}, reversibility failures {rev_bad}, "
                f"fixed points exact: {fixed}")


def _exact_Phi(p, eps):
    u, v = p
    u1 = u + 2 * eps * (1 - v * v)
    return u1, v + 2 * eps * (1 - u1 * u1)


def _alpha_value():
    return alpha_table().alpha_estimate


def crit_splitting():
    alpha = _alpha_value()
    ratios = {}
    for eps in ("0.5", "0.4", "0.3"):
        params = MapParams.create(eps, 256)
        amp = splitting_amplitude(params, lab=SplittingLab(params))
        lead = leading_amplitude(eps, alpha, params.ctx)
        with params.ctx.scope():
            ratios[eps] = amp / lead
    with PrecisionContext(256).scope():
        band = mpfr("0.4") <= ratios["0.4"] <= mpfr("1.6")
        trend = abs(ratios["0.3"] - 1) < abs(ratios["0.5"] - 1)
    detail = ", ".join(f"ratio({e}) = {fmt_decimal(r, 5)}" for e, r in ratios.items())
    return band and trend, f"{detail}; band {'ok' if band else 'missed'}, trend {'ok' if trend else 'wrong way'}"


def crit_orbit():
    t0 = time.perf_counter()
    params = MapParams.create("0.05")
    ys = orbit(0, params.eps, 1600, params)
    ctx = params.ctx
    best_run, run, end = 0, 0, None
    with ctx.scope():
        tol = mpfr("0.05")
        for n, y in enumerate(ys):
            run = run + 1 if abs(y - 1) < tol else 0
            if run > best_run:
                best_run, end = run, n
        crossing = None
        if end is not None:
            for n in range(len(ys) // 2):
                if 2 * n > end and 2 * n + 1 < len(ys) and ys[2 * n] + ys[2 * n + 1] < 0:
                    crossing = n
                    break
    n1, l1 = first_level_length(params)
    elapsed = time.perf_counter() - t0
    with ctx.scope():
        in_band = mpfr("39.5") <= l1 <= mpfr("64.2")
    ok = best_run >= 100 and crossing is not None and in_band and elapsed < 1.0
    return ok, (f"plateau of {best_run} iterates, sign change at n = {crossing}, "
                f"l1 = {fmt_decimal(l1, 6)} (n1 = {n1}); {elapsed:.2f} s")


def crit_determinism():
    from .cli import main

    commands = [
        ["series", "--order", "6"],
        ["alpha", "--order", "21"],
        ["alpha", "--order", "21", "--format", "csv"],
        ["orbit", "--eps", "0.05", "--steps", "200"],
        ["splitting", "--eps", "0.4", "--bits", "256", "--samples", "4"],
    ]
    differing = []
    with tempfile.TemporaryDirectory() as tmp:
        for k, cmd in enumerate(commands):
            blobs = []
            for rep in range(2):
                path = os.path.join(tmp, f"out{k}_{rep}")
                main(cmd + ["--out", path, "--quiet"])
                with open(path, "rb") as fh:
                    blobs.append(fh.read())
            if blobs[0] != blobs[1] or not blobs[0]:
                differing.append(cmd[0])
    return not differing, (f"{len(commands)} commands re-run byte-identical" if not differing
                           else f"outputs differ for {differing}")


CRITERIA = (
    Criterion(1, "polynomial table", "exact", crit_table),
    Criterion(2, "residual vanishes through d^41", "exact", crit_residual),
    Criterion(3, "endpoint and parity invariants", "exact", crit_endpoints),
    Criterion(4, "alpha reproduction at N = 81", "numeric", crit_alpha),
    Criterion(5, "alpha_n decay bound", "numeric", crit_decay),
    Criterion(6, "hat-norm bound", "numeric", crit_hat_norm),
    Criterion(7, "norm inequalities", "numeric", crit_norms),
    Criterion(8, "operator identities", "exact", crit_operators),
    Criterion(9, "map structure", "numeric", crit_map),
    Criterion(10, "splitting amplitude band and trend", "numeric", crit_splitting),
    Criterion(11, "orbit plateau and first-level length", "numeric", crit_orbit),
    Criterion(12, "CLI determinism", "numeric", crit_determinism),
)

SUITES = ("all", "exact", "numeric")


def run_criterion(c: Criterion) -> CriterionResult:
    try:
        ok, detail = c.run()
    except Exception as exc:  # a crash is a failed criterion, reported with its cause
        ok, detail = False, f"raised {type(exc).__name__}: {exc}"
    return CriterionResult(c.number, c.title, c.suite, bool(ok), detail)


def run_suite(suite: str = "all", numbers=None):
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}")
    for c in CRITERIA:
        if suite != "all" and c.suite != suite:
            continue
        if numbers is not None and c.number not in numbers:
            continue
        yield run_criterion(c)

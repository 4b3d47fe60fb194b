"""High-precision dynamics of the leapfrog-discretized logistic equation.

The recurrence y_{n+1} = y_{n-1} + 2 eps (1 - y_n^2) is the planar map
phi(x, y) = (y, x + 2 eps (1 - y^2)).  Its square Phi = phi o phi has saddle
fixed points A = (1, 1) and B = (-1, -1).  The stable manifold of A and the
unstable manifold of B nearly coincide; their vertical distance is of
order exp(-pi^2 / (2 eps)) and is measured here directly.

Manifolds are parametrized locally by Phi(p(s)) = p(lambda s), solved order
by order, then transported by iterating Phi (or its inverse) and evaluated
as graphs v = w(u) by a bracketed root solve along the transported curve.
"""
from __future__ import annotations

from dataclasses import dataclass

import gmpy2
from gmpy2 import mpfr

from .errors import (InputError, NoCrossing, NonPositiveEps, OutOfDomain,
                     PrecisionInsufficient, ResonanceFailure)
from .numeric import PrecisionContext, d_from_eps, default_bits, pi_const

DEFAULT_CHART_ORDER = 30
DEFAULT_MAX_STEPS = 10 ** 6
TRANSPORT_BUDGET = 20000
NEWTON_STEPS = 10


@dataclass(frozen=True)
class MapParams:
    eps: object
    ctx: PrecisionContext

    def __post_init__(self):
        with self.ctx.scope():
            e = mpfr(self.eps, self.ctx.bits)
        if not e > 0:
            raise NonPositiveEps(f"eps must be positive, got {self.eps}")
        object.__setattr__(self, "eps", e)
        need = default_bits(e)
        if self.ctx.bits < need:
            raise InputError(f"eps = {e} needs at least {need} bits, got {self.ctx.bits}")

    @classmethod
    def create(cls, eps, bits: int | None = None) -> "MapParams":
        """Parameters at ``eps`` (decimal string preferred) with default precision."""
        if bits is None:
            bits = default_bits(eps)
        ctx = PrecisionContext(bits)
        with ctx.scope():
            return cls(mpfr(eps, bits), ctx)


@dataclass(frozen=True)
class Point2:
    u: object
    v: object


A_POINT = (1, 1)
B_POINT = (-1, -1)


# Raw steps on (u, v) pairs; callers hold the precision scope.

def _phi(x, y, e2):
    return y, x + e2 * (1 - y * y)


def _phi_inv(x1, y1, e2):
    return y1 - e2 * (1 - x1 * x1), x1


def _Phi(u, v, e2):
    u1 = u + e2 * (1 - v * v)
    return u1, v + e2 * (1 - u1 * u1)


def _Phi_inv(u1, v1, e2):
    v = v1 - e2 * (1 - u1 * u1)
    return u1 - e2 * (1 - v * v), v


def _Phi_tangent(u, v, du, dv, e2):
    """Phi and its derivative applied to the tangent (du, dv)."""
    u1 = u + e2 * (1 - v * v)
    v1 = v + e2 * (1 - u1 * u1)
    du1 = du - 2 * e2 * v * dv
    dv1 = dv - 2 * e2 * u1 * du1
    return u1, v1, du1, dv1


def _Phi_inv_tangent(u1, v1, du1, dv1, e2):
    v = v1 - e2 * (1 - u1 * u1)
    dv = dv1 + 2 * e2 * u1 * du1
    u = u1 - e2 * (1 - v * v)
    du = du1 + 2 * e2 * v * dv
    return u, v, du, dv


def _point_args(p, params):
    ctx = params.ctx
    return mpfr(p.u, ctx.bits), mpfr(p.v, ctx.bits), 2 * params.eps


def step_phi(p: Point2, params: MapParams) -> Point2:
    with params.ctx.scope():
        return Point2(*_phi(*_point_args(p, params)))


def step_phi_inv(p: Point2, params: MapParams) -> Point2:
    with params.ctx.scope():
        return Point2(*_phi_inv(*_point_args(p, params)))


def step_Phi(p: Point2, params: MapParams) -> Point2:
    with params.ctx.scope():
        return Point2(*_Phi(*_point_args(p, params)))


def step_Phi_inv(p: Point2, params: MapParams) -> Point2:
    with params.ctx.scope():
        return Point2(*_Phi_inv(*_point_args(p, params)))


def jacobian(p: Point2, params: MapParams) -> tuple:
    """D Phi at p: ((1, -4 eps v), (-4 eps u1, 1 + 16 eps^2 u1 v)), u1 = first coordinate of Phi(p)."""
    with params.ctx.scope():
        u, v, e2 = _point_args(p, params)
        e = params.eps
        u1 = u + e2 * (1 - v * v)
        return ((mpfr(1), -4 * e * v), (-4 * e * u1, 1 + 16 * e * e * u1 * v))


def orbit(y0, y1, steps: int, params: MapParams) -> list:
    """y_0 .. y_steps of y_{n+1} = y_{n-1} + 2 eps (1 - y_n^2)."""
    if steps < 1:
        raise InputError("steps must be >= 1")
    with params.ctx.scope():
        e2 = 2 * params.eps
        ys = [mpfr(y0, params.ctx.bits), mpfr(y1, params.ctx.bits)]
        for _ in range(steps - 1):
            ys.append(ys[-2] + e2 * (1 - ys[-1] * ys[-1]))
    return ys


def first_level_length(params: MapParams, max_steps: int = DEFAULT_MAX_STEPS) -> tuple:
    """(n1, l1) with n1 the first n such that y_{2n} + y_{2n+1} < 0 and l1 = 2 eps n1.

    The orbit starts at y_0 = 0, y_1 = eps.
    """
    with params.ctx.scope():
        e2 = 2 * params.eps
        a, b = mpfr(0), params.eps
        for n in range(max_steps // 2 + 1):
            if a + b < 0:
                return n, e2 * n
            a, b = _Phi(a, b, e2)
    raise NoCrossing(f"no sign change of y_2n + y_2n+1 within {max_steps} steps")


@dataclass(frozen=True)
class ManifoldChart:
    """p(s) = sum coeffs[k] s^k with Phi(p(s)) = p(lambda s)."""

    base: Point2
    lam: object
    coeffs: tuple
    order: int
    stable: bool
    radius: object          # parameter bound below which truncation is negligible

    def point(self, s, params: MapParams) -> tuple:
        with params.ctx.scope():
            return _horner2(self.coeffs, s)


def _horner2(coeffs, s):
    u = mpfr(0)
    v = mpfr(0)
    for c in reversed(coeffs):
        u = u * s + c[0]
        v = v * s + c[1]
    return u, v


def _horner2_d(coeffs, s):
    """p(s) and p'(s)."""
    u = v = du = dv = mpfr(0)
    for c in reversed(coeffs):
        du = du * s + u
        dv = dv * s + v
        u = u * s + c[0]
        v = v * s + c[1]
    return u, v, du, dv


def _conv(a, b, k):
    return sum((a[i] * b[k - i] for i in range(k + 1)), mpfr(0))


def _phi_series(U, V, e2, n):
    """Taylor coefficients 0..n-1 of Phi applied to the curve (U(s), V(s))."""
    one = [mpfr(1)] + [mpfr(0)] * (n - 1)
    v2 = [_conv(V, V, k) for k in range(n)]
    u1 = [U[k] + e2 * (one[k] - v2[k]) for k in range(n)]
    u12 = [_conv(u1, u1, k) for k in range(n)]
    v1 = [V[k] + e2 * (one[k] - u12[k]) for k in range(n)]
    return u1, v1


def _resolve_base(base):
    if isinstance(base, str):
        base = {"A": A_POINT, "B": B_POINT}[base.upper()]
    if isinstance(base, Point2):
        return base
    return Point2(*base)


def build_manifold_chart(base, stable: bool, params: MapParams,
                         order: int = DEFAULT_CHART_ORDER) -> ManifoldChart:
    """Local parametrization of the stable (lambda < 1) or unstable manifold of a fixed point.

    The eigenvector is normalized to unit length and oriented towards the
    origin, i.e. into the region between the two saddles.
    """
    if order < 5:
        raise InputError("chart order must be >= 5")
    base = _resolve_base(base)
    ctx = params.ctx
    with ctx.scope():
        u0, v0 = mpfr(base.u, ctx.bits), mpfr(base.v, ctx.bits)
        e = params.eps
        e2 = 2 * e
        fu, fv = _Phi(u0, v0, e2)
        if fu != u0 or fv != v0:
            raise InputError(f"({base.u}, {base.v}) is not a fixed point of Phi")
        (j11, j12), (j21, j22) = jacobian(base, params)
        tr, det = j11 + j22, j11 * j22 - j12 * j21
        disc = gmpy2.sqrt(tr * tr - 4 * det)
        lam_big, lam_small = (tr + disc) / 2, (tr - disc) / 2
        lam, other = (lam_small, lam_big) if stable else (lam_big, lam_small)
        # (J - lam) x = 0 from the first row
        x, y = -j12, j11 - lam
        nrm = gmpy2.sqrt(x * x + y * y)
        x, y = x / nrm, y / nrm
        if x * (-u0) + y * (-v0) < 0:
            x, y = -x, -y
        U = [u0, x]
        V = [v0, y]
        tiny = gmpy2.exp2(-(ctx.bits // 2))
        for k in range(2, order + 1):
            U.append(mpfr(0))
            V.append(mpfr(0))
            cu, cv = (w[k] for w in _phi_series(U, V, e2, k + 1))
            lk = lam ** k
            if abs(lk - other) < tiny or abs(lk - lam) < tiny:
                raise ResonanceFailure(f"lambda^{k} is resonant with an eigenvalue")
            a11, a12, a21, a22 = j11 - lk, j12, j21, j22 - lk
            dd = a11 * a22 - a12 * a21
            U[k] = (-cu * a22 + cv * a12) / dd
            V[k] = (-cv * a11 + cu * a21) / dd
        coeffs = tuple(zip(U, V))
        radius = _chart_radius(coeffs, ctx)
    return ManifoldChart(base, lam, coeffs, order, stable, radius)


def _chart_radius(coeffs, ctx):
    """Largest power of two sigma with the last two terms below 2^-bits."""
    target = gmpy2.exp2(-ctx.bits)
    sigma = mpfr(1)
    K = len(coeffs) - 1
    while True:
        tail = max(abs(coeffs[K][0]), abs(coeffs[K][1])) * sigma ** K
        tail += max(abs(coeffs[K - 1][0]), abs(coeffs[K - 1][1])) * sigma ** (K - 1)
        if tail < target:
            return sigma
        sigma /= 2


def chart_residual(chart: ManifoldChart, params: MapParams) -> object:
    """Largest |coefficient| of Phi(p(s)) - p(lambda s) through the chart order."""
    with params.ctx.scope():
        U = [c[0] for c in chart.coeffs]
        V = [c[1] for c in chart.coeffs]
        n = chart.order + 1
        pu, pv = _phi_series(U, V, 2 * params.eps, n)
        worst = mpfr(0)
        for k in range(n):
            lk = chart.lam ** k
            worst = max(worst, abs(pu[k] - lk * U[k]), abs(pv[k] - lk * V[k]))
        return worst


def _transport(chart, params, s, m, tangent=False):
    e2 = 2 * params.eps
    if tangent:
        u, v, du, dv = _horner2_d(chart.coeffs, s)
        step = _Phi_inv_tangent if chart.stable else _Phi_tangent
        for _ in range(m):
            u, v, du, dv = step(u, v, du, dv, e2)
        return u, v, du, dv
    u, v = _horner2(chart.coeffs, s)
    step = _Phi_inv if chart.stable else _Phi
    for _ in range(m):
        u, v = step(u, v, e2)
    return u, v


def manifold_graph_value(chart: ManifoldChart, x, params: MapParams) -> object:
    """Second coordinate of the manifold point whose first coordinate is x.

    Stable charts are transported by Phi^-1 and unstable charts by Phi; the
    segment s in [sigma, sigma*f] (f = 1/lambda or lambda) covers one
    fundamental domain, so some iterate of it crosses u = x.
    """
    ctx = params.ctx
    with ctx.scope():
        x = mpfr(x, ctx.bits)
        if not abs(x) < 1:
            raise OutOfDomain(f"x = {x} is outside (-1, 1)")
        sigma = chart.radius
        fac = 1 / chart.lam if chart.stable else chart.lam
        u0 = mpfr(chart.base.u, ctx.bits)

        def between(a, b):
            return min(a, b) <= x <= max(a, b)

        lo, hi, m = None, None, None
        first = _transport(chart, params, sigma, 0)[0]
        if between(u0, first):
            lo, hi, m = mpfr(0), sigma, 0
        else:
            e2 = 2 * params.eps
            p = _horner2(chart.coeffs, sigma)
            step = _Phi_inv if chart.stable else _Phi
            for k in range(TRANSPORT_BUDGET):
                q = step(p[0], p[1], e2)
                if between(p[0], q[0]):
                    lo, hi, m = sigma, sigma * fac, k
                    break
                if not (abs(q[0]) < 4 and abs(q[1]) < 4):
                    break
                p = q
        if m is None:
            raise OutOfDomain(f"the transported manifold does not reach u = {x}")
        return _solve_on_segment(chart, params, x, lo, hi, m)


def _solve_on_segment(chart, params, x, lo, hi, m):
    ctx = params.ctx
    f_lo = _transport(chart, params, lo, m)[0] - x
    if f_lo == 0:
        return _transport(chart, params, lo, m)[1]
    # bisection to about half precision, then safeguarded Newton
    half = gmpy2.exp2(-(ctx.bits // 2))
    while hi - lo > half * hi:
        mid = (lo + hi) / 2
        f_mid = _transport(chart, params, mid, m)[0] - x
        if f_mid == 0:
            return _transport(chart, params, mid, m)[1]
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    s = (lo + hi) / 2
    for _ in range(NEWTON_STEPS):
        u, v, du, dv = _transport(chart, params, s, m, tangent=True)
        if du == 0:
            break
        s_new = s - (u - x) / du
        if not lo <= s_new <= hi:
            break
        if s_new == s:
            break
        s = s_new
    return _transport(chart, params, s, m)[1]


@dataclass(frozen=True)
class SplittingSample:
    eps: object
    x: object
    t: object
    measured: object
    predicted: object
    ratio: object


def predicted_closed_form(eps, x, alpha, ctx: PrecisionContext):
    """4 pi alpha cos(pi t/eps + pi) exp(-pi^2/(2 eps)) / (eps^3 (1 - tanh(t)^2)), t = artanh(x)."""
    with ctx.scope():
        e = mpfr(eps, ctx.bits)
        x = mpfr(x, ctx.bits)
        pi = pi_const(ctx)
        t = gmpy2.atanh(x)
        return (4 * pi * mpfr(alpha, ctx.bits) * gmpy2.cos(pi * t / e + pi)
                * gmpy2.exp(-pi * pi / (2 * e)) / (e ** 3 * (1 - x * x)))


def predicted_coupled(eps, x, alpha, ctx: PrecisionContext):
    """Leading term written in the coupled parameter d = asinh(2 eps)/2.

    -16 pi^2 alpha cos(pi artanh(x)/d) exp(-pi^2/(2d)) / (eps d^2 (1 - x^2)).
    """
    d = d_from_eps(eps, ctx)
    with ctx.scope():
        e = mpfr(eps, ctx.bits)
        x = mpfr(x, ctx.bits)
        pi = pi_const(ctx)
        phase = pi * gmpy2.atanh(x) / d
        return (-16 * pi * pi * mpfr(alpha, ctx.bits) * gmpy2.cos(phase)
                * gmpy2.exp(-pi * pi / (2 * d)) / (e * d * d * (1 - x * x)))


MODELS = {"closed_form": predicted_closed_form, "coupled": predicted_coupled}


class SplittingLab:
    """Charts for one parameter set, built once and reused across abscissae."""

    def __init__(self, params: MapParams, order: int = DEFAULT_CHART_ORDER):
        self.params = params
        self.stable = build_manifold_chart("A", True, params, order)
        self.unstable = build_manifold_chart("B", False, params, order)

    def w_stable(self, x):
        return manifold_graph_value(self.stable, x, self.params)

    def w_unstable(self, x):
        return manifold_graph_value(self.unstable, x, self.params)

    def distance(self, x):
        """Stable graph value minus unstable graph value at abscissa x."""
        ws, wu = self.w_stable(x), self.w_unstable(x)
        with self.params.ctx.scope():
            return ws - wu

    def floor(self):
        return gmpy2.exp2(-(self.params.ctx.bits // 2) + 16)


def vertical_splitting(params: MapParams, x_grid, alpha, model: str = "closed_form",
                       lab: SplittingLab | None = None) -> list:
    if model not in MODELS:
        raise InputError(f"unknown model {model!r}; choose from {sorted(MODELS)}")
    lab = lab or SplittingLab(params)
    ctx = params.ctx
    out = []
    for x in x_grid:
        meas = lab.distance(x)
        pred = MODELS[model](params.eps, x, alpha, ctx)
        with ctx.scope():
            xx = mpfr(x, ctx.bits)
            ratio = meas / pred if pred != 0 else mpfr("nan")
            out.append(SplittingSample(params.eps, xx, gmpy2.atanh(xx), meas, pred, ratio))
    if out:
        peak = max(abs(s.measured) for s in out)
        if peak < lab.floor():
            raise PrecisionInsufficient(
                f"largest |measured| {peak} is below the precision floor; raise the bit count")
    return out


def period_grid(eps, n: int, ctx: PrecisionContext) -> list:
    """n abscissae x = tanh(t) with t evenly spaced over [-eps, eps]."""
    if n < 2:
        raise InputError("need at least two grid points")
    with ctx.scope():
        e = mpfr(eps, ctx.bits)
        return [gmpy2.tanh(-e + 2 * e * k / (n - 1)) for k in range(n)]


def splitting_amplitude(params: MapParams, n: int = 17, lab: SplittingLab | None = None):
    """max |measured(x)| (1 - x^2) over one oscillation period, t in [-eps, eps].

    Multiplying by 1 - x^2 removes the separatrix weight, so the result is
    directly comparable with the constant prefactor of the leading term.
    """
    lab = lab or SplittingLab(params)
    ctx = params.ctx
    best = mpfr(0)
    for x in period_grid(params.eps, n, ctx):
        dist = lab.distance(x)
        with ctx.scope():
            best = max(best, abs(dist) * (1 - x * x))
    if best < lab.floor():
        raise PrecisionInsufficient("splitting amplitude is below the precision floor")
    return best


def leading_amplitude(eps, alpha, ctx: PrecisionContext):
    """4 pi alpha exp(-pi^2/(2 eps)) / eps^3."""
    with ctx.scope():
        e = mpfr(eps, ctx.bits)
        pi = pi_const(ctx)
        return 4 * pi * mpfr(alpha, ctx.bits) * gmpy2.exp(-pi * pi / (2 * e)) / e ** 3

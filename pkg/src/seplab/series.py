"""Truncated power series in d with polynomial coefficients in u.

A ``DSeries`` stores X(d, u) = sum_n X_n(u) d^n for n = 0..order.  Operators
of the form f(dD) act by  [d^n] f(dD)X = sum_i f_i D^i X_{n-i}.

The formal solution A(d, u) = u + sum_k A_{2k+1}(u) d^(2k) of the discrete
logistic equation  sinh(dD)A = eps (1 - A^2),  eps = sinh(2d)/2,  is built
order by order: each new coefficient solves a first-order linear ODE in u
whose right-hand side must vanish to second order at u = +-1.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from math import factorial

import gmpy2
from gmpy2 import mpfr, mpq

from .errors import (DivisibilityFailure, InputError, OrderMismatch, ParityFailure,
                     TruncationTooLarge)
from .numeric import (PrecisionContext, d_from_eps, eps_series_coeffs, fmt_rational,
                      parse_rational, pi_const)
from .poly import ONE_MINUS_U2, U, UPoly, apply_D, norm_n, tau_basis

_ZERO = mpq(0)
_ZPOLY = UPoly()


class DSeries:
    """Immutable truncated series; ``coeffs[n]`` is the UPoly multiplying d^n."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs, order: int | None = None):
        c = [p if isinstance(p, UPoly) else UPoly(p) for p in coeffs]
        if order is None:
            order = len(c) - 1
        if order < 0:
            raise InputError("series order must be >= 0")
        c = (c + [_ZPOLY] * (order + 1 - len(c)))[: order + 1]
        object.__setattr__(self, "coeffs", tuple(c))

    def __setattr__(self, name, value):
        raise AttributeError("DSeries is immutable")

    @classmethod
    def from_scalars(cls, values, order: int | None = None) -> "DSeries":
        return cls([UPoly([v]) for v in values], order)

    @classmethod
    def zero(cls, order: int) -> "DSeries":
        return cls([], order)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, n: int) -> UPoly:
        return self.coeffs[n]

    def __iter__(self):
        return iter(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, DSeries):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        terms = [f"({p})*d^{n}" for n, p in enumerate(self.coeffs) if p]
        return f"DSeries(order={self.order}: {' + '.join(terms) or '0'})"

    def truncate(self, order: int) -> "DSeries":
        return DSeries(self.coeffs[: order + 1], order)

    def _coerce(self, other):
        if isinstance(other, DSeries):
            return other
        if isinstance(other, UPoly):
            return DSeries([other], self.order)
        return DSeries([UPoly([other])], self.order)

    def __neg__(self):
        return DSeries([-p for p in self.coeffs])

    def __add__(self, other):
        other = self._coerce(other)
        n = min(self.order, other.order)
        return DSeries([self.coeffs[k] + other.coeffs[k] for k in range(n + 1)])

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, (DSeries, UPoly)):
            return DSeries([p * other for p in self.coeffs])
        other = self._coerce(other)
        n = min(self.order, other.order)
        a, b = self.coeffs, other.coeffs
        out = []
        for k in range(n + 1):
            acc = _ZPOLY
            for i in range(k + 1):
                if a[i] and b[k - i]:
                    acc = acc + a[i] * b[k - i]
            out.append(acc)
        return DSeries(out)

    __rmul__ = __mul__

    def is_class_q(self) -> bool:
        """True if deg X_n <= n for every n."""
        return all(p.degree <= n for n, p in enumerate(self.coeffs))

    def is_odd_in_d(self) -> bool:
        return all(not p for p in self.coeffs[0::2])

    def is_even_in_d(self) -> bool:
        return all(not p for p in self.coeffs[1::2])

    def valuation(self) -> int | None:
        """Index of the first nonzero coefficient, None for the zero series."""
        for n, p in enumerate(self.coeffs):
            if p:
                return n
        return None

    def hat(self) -> list:
        """Leading-term map: the u^n coefficient of X_n for each n."""
        return [p[n] for n, p in enumerate(self.coeffs)]


def exp_coeffs(order: int, theta=1) -> list:
    theta = mpq(theta)
    return [theta ** k / factorial(k) for k in range(order + 1)]


def cosh_coeffs(order: int, scale=1) -> list:
    scale = mpq(scale)
    return [scale ** k / factorial(k) if k % 2 == 0 else _ZERO for k in range(order + 1)]


def sinh_coeffs(order: int, scale=1) -> list:
    scale = mpq(scale)
    return [scale ** k / factorial(k) if k % 2 else _ZERO for k in range(order + 1)]


def series_reciprocal(c: list, order: int) -> list:
    """Coefficients of 1/f given those of f (f_0 != 0), exact."""
    if not c or not c[0]:
        raise InputError("series is not invertible: zero constant term")
    c = list(c) + [_ZERO] * (order + 1 - len(c))
    g = [1 / mpq(c[0])]
    for n in range(1, order + 1):
        s = sum((c[k] * g[n - k] for k in range(1, n + 1)), _ZERO)
        g.append(-s / c[0])
    return g


def apply_f_of_dD(f_coeffs: list, X: DSeries) -> DSeries:
    """[d^n] f(dD)X = sum_{i<=n} f_i D^i X_{n-i}, exact."""
    N = X.order
    if len(f_coeffs) < N + 1:
        raise OrderMismatch(f"need {N + 1} coefficients of f, got {len(f_coeffs)}")
    f = [mpq(x) for x in f_coeffs[: N + 1]]
    out = [_ZPOLY] * (N + 1)
    for k, xk in enumerate(X.coeffs):
        cur = xk
        for i in range(N - k + 1):
            if not cur:
                break
            if f[i]:
                out[k + i] = out[k + i] + cur * f[i]
            if k + i < N:
                cur = apply_D(cur)
    return DSeries(out)


def op_C(X: DSeries) -> DSeries:
    """cosh(dD/2)."""
    return apply_f_of_dD(cosh_coeffs(X.order, mpq(1, 2)), X)


def op_S(X: DSeries) -> DSeries:
    """sinh(dD/2)."""
    return apply_f_of_dD(sinh_coeffs(X.order, mpq(1, 2)), X)


def op_C2(X: DSeries) -> DSeries:
    """cosh(dD)."""
    return apply_f_of_dD(cosh_coeffs(X.order), X)


def op_S2(X: DSeries) -> DSeries:
    """sinh(dD)."""
    return apply_f_of_dD(sinh_coeffs(X.order), X)


def sech_half_coeffs(order: int) -> list:
    """Taylor coefficients of 1/cosh(z/2)."""
    return series_reciprocal(cosh_coeffs(order, mpq(1, 2)), order)


def op_C_inverse(X: DSeries) -> DSeries:
    return apply_f_of_dD(sech_half_coeffs(X.order), X)


def op_exp(X: DSeries, theta=1) -> DSeries:
    """exp(theta dD); acting on u it gives the d-expansion of u shifted along tanh."""
    return apply_f_of_dD(exp_coeffs(X.order, theta), X)


def t_plus_series(order: int) -> DSeries:
    """(u + tanh d)/(1 + u tanh d) = sum_n tau_{n+1}(u) d^n."""
    if order < 0:
        raise InputError("order must be >= 0")
    return DSeries(tau_basis(order + 1)[1:])


def t_minus_series(order: int) -> DSeries:
    t = t_plus_series(order)
    return DSeries([p if n % 2 == 0 else -p for n, p in enumerate(t.coeffs)])


@dataclass(frozen=True)
class FormalSolution:
    """Coefficients A_1, A_3, ..., A_{order+1}; ``polys[k]`` is A_{2k+1}."""

    order: int
    polys: tuple

    def A(self, n: int) -> UPoly:
        """A_n for odd n (the coefficient of d^(n-1))."""
        if n % 2 == 0 or not 1 <= n <= self.order + 1:
            raise InputError(f"A_{n} is not part of an order-{self.order} solution")
        return self.polys[(n - 1) // 2]

    def as_series(self, order: int | None = None) -> DSeries:
        if order is None:
            order = self.order
        c = [_ZPOLY] * (order + 1)
        for k, p in enumerate(self.polys):
            if 2 * k <= order:
                c[2 * k] = p
        return DSeries(c)

    def to_json(self) -> dict:
        return {"order": self.order,
                "polys": [[fmt_rational(c) for c in p.coeffs] for p in self.polys]}

    @classmethod
    def from_json(cls, doc: dict) -> "FormalSolution":
        polys = tuple(UPoly([parse_rational(s) for s in row]) for row in doc["polys"])
        order = int(doc["order"])
        if len(polys) != order // 2 + 1:
            raise InputError("polynomial count does not match order")
        return cls(order, polys)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":")) + "\n"

    @classmethod
    def loads(cls, s: str) -> "FormalSolution":
        return cls.from_json(json.loads(s))


def _check_double_roots(R: UPoly, step: int) -> UPoly:
    """Divide R by (1 - u)^2 (1 + u)^2 exactly; fail loudly otherwise."""
    dR = R.derivative()
    for x in (1, -1):
        if R(mpq(x)) or dR(mpq(x)):
            raise DivisibilityFailure(
                f"residual at d^{step} does not vanish to second order at u = {x}")
    q = R
    for root in (1, 1, -1, -1):
        q, rem = q.div_linear(root)
        if rem:
            raise DivisibilityFailure(f"nonzero remainder dividing the d^{step} residual")
    return q


def compute_formal_solution(N: int) -> FormalSolution:
    """Odd formal solution through d^N (N even): returns A_1..A_{N+1}."""
    if N < 0 or N % 2:
        raise InputError(f"order must be even and >= 0, got {N}")
    eps = eps_series_coeffs(N + 3)
    A = [U]                           # A[k] multiplies d^(2k)
    Dpow = [[U]]                      # Dpow[k][i] = D^i A[k]
    Z2 = [U * U]                      # Z2[k] = [d^(2k)] A^2, complete for k <= current
    for n in range(0, N, 2):
        m = n + 3
        # [d^m] of 2 sinh(dD)A - 2 eps (1 - A^2) from the known A_1..A_{n+1}
        R = _ZPOLY
        for i in range(1, m + 1, 2):
            k2 = m - i
            if k2 > n:
                continue
            L = Dpow[k2 // 2]
            while len(L) <= i:
                L.append(apply_D(L[-1]))
            R = R + L[i] * mpq(2, factorial(i))
        top = n // 2 + 1
        partial = _ZPOLY
        for a in range(1, top):
            partial = partial + A[a] * A[top - a]
        for j in range(1, m + 1, 2):
            s = (m - j) // 2
            z2 = partial if s == top else Z2[s]
            one_minus = (1 - z2) if s == 0 else -z2
            R = R - one_minus * (2 * eps[j])
        # odd d-power, even in u: D flips u-parity and 1 - A^2 is even
        if not R.is_even():
            raise ParityFailure(f"residual at d^{m} is not even in u")
        q = _check_double_roots(R, m)
        new = -(ONE_MINUS_U2 * (q * mpq(1, 2)).integral())
        A.append(new)
        Dpow.append([new])
        Z2.append(partial + 2 * (A[0] * new))
    sol = FormalSolution(N, tuple(A))
    _check_solution(sol)
    return sol


def _check_solution(sol: FormalSolution) -> None:
    for k, p in enumerate(sol.polys):
        if not p.is_odd():
            raise ParityFailure(f"A_{2 * k + 1} is not odd")
        if p.degree > 2 * k + 1:
            raise ParityFailure(f"A_{2 * k + 1} has degree {p.degree}")
        if k and (p(mpq(1)) or p(mpq(-1))):
            raise DivisibilityFailure(f"A_{2 * k + 1} does not vanish at u = +-1")


def residual_of_equation(sol: FormalSolution) -> DSeries:
    """sinh(dD)A - eps (1 - A^2) through d^(order+1); identically zero for a solution."""
    M = sol.order + 1
    A = sol.as_series(M)
    eps = DSeries.from_scalars(eps_series_coeffs(M), M)
    return op_S2(A) - eps * (1 - A * A)


def evaluate_A(sol: FormalSolution, truncation: int, eps, t, ctx: PrecisionContext):
    """sum_{2k <= truncation} A_{2k+1}(u) d^(2k) at u = tanh(d t / eps)."""
    if truncation > sol.order:
        raise TruncationTooLarge(f"truncation {truncation} exceeds solution order {sol.order}")
    if truncation < 0:
        raise InputError("truncation must be >= 0")
    d = d_from_eps(eps, ctx)
    with ctx.scope():
        e = mpfr(eps, ctx.bits)
        u = gmpy2.tanh(d * mpfr(t, ctx.bits) / e)
        d2 = d * d
        acc = mpfr(0)
        for p in reversed(sol.polys[: truncation // 2 + 1]):
            acc = acc * d2 + p(u)
        return acc


def gevrey_profile(sol: FormalSolution, ctx: PrecisionContext) -> list:
    """(n, ||A_n||_n pi^n / n!) for odd n >= 3.

    For this solution the values grow roughly like 4n: Gevrey-1 of type pi
    up to one extra factor of n.
    """
    out = []
    with ctx.scope():
        pi = pi_const(ctx)
    for k in range(1, len(sol.polys)):
        n = 2 * k + 1
        nrm = norm_n(sol.polys[k], n, ctx)
        with ctx.scope():
            out.append((n, nrm * pi ** n / factorial(n)))
    return out

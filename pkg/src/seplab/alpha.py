"""Leading asymptotic coefficients of the formal solution and the constant alpha.

Starting from B = eps*A, the low-order part U is split off (B = U + F), the
series is multiplied by Q (G = Q*F) and smoothed with cosh(dD/2) (E = C(G)).
Each odd coefficient E_n is expanded in the tau basis; its top three
components give alpha_n, beta_{n-2} and gamma_{n-4} through

    E_n = alpha_n (n-1)! (i/pi)^(n-1) tau_n + beta_{n-2} (n-3)! (i/pi)^(n-3) tau_{n-2}
          + gamma_{n-4} (n-5)! (i/pi)^(n-5) tau_{n-4} + (degree <= n-6).

alpha is (1/pi) * sum of alpha_n, truncated at N with an explicit tail bound.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial

from gmpy2 import mpfr, mpq

from .errors import EmptyInput, InputError, InsufficientOrder, StructureFailure
from .numeric import PrecisionContext, eps_series_coeffs, pi_const
from .poly import U as U_POLY
from .poly import UPoly, apply_D, norm_n, to_tau
from .series import DSeries, FormalSolution, compute_formal_solution, op_C

ALPHA_BITS = 256
TAIL_NUMERATOR = mpq(762333542)
DECAY_NUMERATOR = mpq("98048.15")
K0_BOUND = "308027.359777894414"
ALPHA_REFERENCE = "1.264150331"
ALPHA_INTERVAL = ("1.2641497", "1.2641509")

# Leading u^8 coefficient of the d^8 term of Q.  47/18 is the value for which
# Q_8(+-1) = 0 like the lower terms; see build_derived_series.
Q8_LEADING = mpq(47, 18)
_GUARD = 64


def q_series(order: int, q8_leading=Q8_LEADING) -> DSeries:
    c = [UPoly()] * (order + 1)
    terms = {
        2: UPoly([1, 0, -1]),
        4: UPoly([0, 0, -1, 0, 1]),
        6: UPoly([0, 0, mpq(-4, 3), 0, mpq(7, 2), 0, mpq(-13, 6)]),
        8: UPoly([1, 0, mpq(-104, 45), 0, mpq(58, 15), 0, mpq(-31, 6), 0, mpq(q8_leading)]),
    }
    for k, p in terms.items():
        if k <= order:
            c[k] = p
    return DSeries(c)


def q1_series(order: int) -> DSeries:
    c = [UPoly()] * (order + 1)
    terms = {2: UPoly([1, 0, -1]), 4: UPoly([0, 0, mpq(3, 2), 0, mpq(-3, 2)])}
    for k, p in terms.items():
        if k <= order:
            c[k] = p
    return DSeries(c)


def u_series(order: int) -> DSeries:
    """eps*u + (u - u^3) d^3 + (10/3 u^5 - 16/3 u^3 + 2u) d^5, eps expanded in d."""
    eps = eps_series_coeffs(max(order, 1))[: order + 1]
    c = [U_POLY * e for e in eps]
    extra = {3: UPoly([0, 1, 0, -1]), 5: UPoly([0, 2, 0, mpq(-16, 3), 0, mpq(10, 3)])}
    for k, p in extra.items():
        if k <= order:
            c[k] = c[k] + p
    return DSeries(c)


@dataclass(frozen=True)
class DerivedSeries:
    B: DSeries
    U: DSeries
    Q: DSeries
    Q1: DSeries
    F: DSeries
    G: DSeries
    E: DSeries

    @property
    def order(self) -> int:
        return self.E.order


def _require(cond: bool, what: str) -> None:
    if not cond:
        raise StructureFailure(what)


def build_derived_series(sol: FormalSolution, N: int | None = None,
                         q8_leading=Q8_LEADING) -> DerivedSeries:
    """B, U, Q, Q1, F = B - U, G = Q*F and E = C(G) through d^N.

    The d^N coefficient of B needs A through d^(N-1), so N may exceed the
    solution order by one; the default N is ``sol.order + 1``.
    """
    if N is None:
        N = sol.order + 1
    if N > sol.order + 1:
        raise InputError(f"order {N} needs a formal solution of order >= {N - 1}")
    if N < 1:
        raise InputError("order must be >= 1")
    eps = DSeries.from_scalars(eps_series_coeffs(N), N)
    B = eps * sol.as_series(N)
    U = u_series(N)
    Q = q_series(N, q8_leading)
    Q1 = q1_series(N)

    eps_u = eps * U_POLY
    for n in range(3, N + 1):
        b = B[n] - eps_u[n]
        _require(not b(mpq(1)) and not b(mpq(-1)), f"B_{n}(+-1) != 0")
    for name, S in (("Q", Q), ("Q1", Q1)):
        for n, p in enumerate(S):
            _require(not p(mpq(1)) and not p(mpq(-1)), f"{name}_{n}(+-1) != 0")

    F = B - U
    v = F.valuation()
    _require(v is None or v >= 7, f"F has a nonzero coefficient at d^{v}")
    G = Q * F
    v = G.valuation()
    _require(v is None or v >= 9, f"G has a nonzero coefficient at d^{v}")
    E = op_C(G)
    _require(E.is_odd_in_d(), "E has a nonzero even-order coefficient")
    _require(all(p.is_odd() for p in E), "E has a coefficient that is not an odd polynomial")
    for name, S in (("F", F), ("G", G), ("E", E)):
        _require(S.is_class_q(), f"{name} is not of class Q")
    return DerivedSeries(B, U, Q, Q1, F, G, E)


@dataclass(frozen=True)
class AlphaRow:
    n: int
    e_lead: object       # exact tau_n coefficient of E_n
    alpha_n: object
    beta: object         # beta_{n-2}
    gamma: object        # gamma_{n-4}


@dataclass(frozen=True)
class AlphaTable:
    order: int
    bits: int
    rows: tuple
    partial_sum: object
    tail_bound: object
    alpha_estimate: object

    def row(self, n: int) -> AlphaRow:
        for r in self.rows:
            if r.n == n:
                return r
        raise KeyError(n)


def _leading_to_real(c, k: int, pi):
    """c * pi^(k-1) * (-1)^((k-1)/2) / (k-1)!  for odd k (caller sets precision)."""
    if k < 1:
        return mpfr(0)
    sign = -1 if ((k - 1) // 2) % 2 else 1
    return sign * mpfr(c) * pi ** (k - 1) / factorial(k - 1)


def extract_alpha_coeffs(ds: DerivedSeries, ctx: PrecisionContext | None = None,
                         start: int = 7) -> AlphaTable:
    if ctx is None:
        ctx = PrecisionContext(ALPHA_BITS)
    N = ds.order
    if N < 9:
        raise InsufficientOrder("derived series must reach d^9")
    wide = ctx.widened(_GUARD)
    rows = []
    for n in range(7, N + 1, 2):
        a = to_tau(ds.E[n], n).a
        with wide.scope():
            pi = pi_const(wide)
            vals = [_leading_to_real(a[n], n, pi),
                    _leading_to_real(a[n - 2], n - 2, pi),
                    _leading_to_real(a[n - 4], n - 4, pi)]
        with ctx.scope():
            vals = [mpfr(x, ctx.bits) for x in vals]
        rows.append(AlphaRow(n, a[n], *vals))
    table = AlphaTable(N, ctx.bits, tuple(rows), None, None, None)
    est = alpha_estimate(table, N, ctx, start=start) if N >= 15 else None
    if est is None:
        return table
    return AlphaTable(N, ctx.bits, tuple(rows), est.value, est.tail, est.value)


@dataclass(frozen=True)
class AlphaEstimate:
    order: int
    value: object
    tail: object
    bits: int

    @property
    def lower(self):
        with PrecisionContext(self.bits).scope():
            return self.value - self.tail

    @property
    def upper(self):
        with PrecisionContext(self.bits).scope():
            return self.value + self.tail

    def contains(self, x) -> bool:
        return self.lower <= x <= self.upper


def tail_bound(N: int, ctx: PrecisionContext):
    """762333542 / (N (N-1) ... (N-7)), the bound on the omitted part of the alpha sum."""
    den = 1
    for j in range(8):
        den *= N - j
    if den <= 0:
        raise InputError(f"tail bound undefined for N = {N}")
    with ctx.scope():
        return mpfr(TAIL_NUMERATOR / den, ctx.bits)


def decay_bound(n: int, ctx: PrecisionContext):
    """98048.15 / ((n-1)(n-2)...(n-6)), the bound on |alpha_n| for n >= 9."""
    den = 1
    for j in range(1, 7):
        den *= n - j
    with ctx.scope():
        return mpfr(DECAY_NUMERATOR / den, ctx.bits)


def alpha_estimate(table: AlphaTable, N: int, ctx: PrecisionContext, start: int = 7) -> AlphaEstimate:
    """(1/pi) * sum_{n=start, odd}^{N} alpha_n with the tail bound at N."""
    if N < 15:
        raise InsufficientOrder(f"alpha estimate needs N >= 15, got {N}")
    if N > table.order:
        raise InsufficientOrder(f"table only reaches n = {table.order}")
    if start not in (7, 9):
        raise InputError("summation starts at n = 7 or n = 9")
    wide = ctx.widened(_GUARD)
    with wide.scope():
        s = mpfr(0)
        for r in table.rows:
            if start <= r.n <= N:
                s += r.alpha_n
        s = s / pi_const(wide)
    with ctx.scope():
        return AlphaEstimate(N, mpfr(s, ctx.bits), tail_bound(N, ctx), ctx.bits)


def hat_leading(ds: DerivedSeries) -> list:
    """[(n, u^n coefficient of E_n)] for n = 0..order."""
    return list(enumerate(ds.E.hat()))


def hat_norm(entries, m: int, p: int, ctx: PrecisionContext):
    """sup over entries of |x_n| pi^n / (n-p)!, the weighted sup norm |x|_{m,p}."""
    if not (m > p >= -1 and m >= 0):
        raise InputError(f"need m > p >= -1 and m >= 0, got m={m}, p={p}")
    entries = list(entries)
    if not entries:
        raise EmptyInput("no coefficients given")
    for n, _ in entries:
        if n < m or (n - m) % 2:
            raise InputError(f"index {n} is not in {m}, {m + 2}, ...")
    wide = ctx.widened(_GUARD)
    with wide.scope():
        pi = pi_const(wide)
        best = max(abs(mpfr(x)) * pi ** n / factorial(n - p) for n, x in entries)
    with ctx.scope():
        return mpfr(best, ctx.bits)


def beta_decay_profile(table: AlphaTable) -> list:
    """(n-2, |beta_{n-2}| (n-2)^5) for every row with n - 2 >= 1."""
    out = []
    for r in table.rows:
        k = r.n - 2
        out.append((k, abs(r.beta) * k ** 5))
    return out


def smoothed_gevrey_profile(ds: DerivedSeries, ctx: PrecisionContext) -> list:
    """(n, ||D E_n||_{n+1} pi^n / (n-7)!) for odd n >= 9.

    [d^(n+1)] of dD C(G) is D E_n; the sequence stays bounded when E has the
    Gevrey growth that makes the alpha_n summable.
    """
    wide = ctx.widened(_GUARD)
    with wide.scope():
        pi = pi_const(wide)
    out = []
    for n in range(9, ds.order + 1, 2):
        nrm = norm_n(apply_D(ds.E[n]), n + 1, wide)
        with wide.scope():
            val = nrm * pi ** n / factorial(n - 7)
        with ctx.scope():
            out.append((n, mpfr(val, ctx.bits)))
    return out


def compute_alpha_table(order: int = 81, ctx: PrecisionContext | None = None,
                        start: int = 7) -> AlphaTable:
    """Full pipeline: formal solution, derived series and the alpha table at ``order``."""
    if order < 9 or order % 2 == 0:
        raise InputError(f"alpha order must be odd and >= 9, got {order}")
    sol = compute_formal_solution(order - 1)
    return extract_alpha_coeffs(build_derived_series(sol, order), ctx, start=start)

"""Polynomials in u over the rationals, the operator D and the tau basis.

D is the derivation (1 - u^2) d/du.  The tau polynomials are
tau_0 = 1, tau_1 = u, tau_{n+1} = D(tau_n)/n; tau_n(tanh z) is the
(n-1)-st z-derivative of tanh z divided by (n-1)!.  tau_k has exact degree k,
so any polynomial of degree <= n has a unique triangular expansion in
tau_0..tau_n.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from numbers import Rational as _AbstractRational

from gmpy2 import mpfr, mpq

from .errors import DegreeTooHigh
from .numeric import PrecisionContext, pi_const

_ZERO = mpq(0)


def _trim(c: list) -> list:
    while c and not c[-1]:
        c.pop()
    return c


def _is_scalar(x) -> bool:
    return isinstance(x, (int, _AbstractRational)) or type(x) is type(_ZERO)


class UPoly:
    """Dense immutable polynomial; ``coeffs[k]`` multiplies u^k.

    The zero polynomial has an empty coefficient tuple and degree -1.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        object.__setattr__(self, "coeffs", tuple(_trim([mpq(c) for c in coeffs])))

    @classmethod
    def _wrap(cls, lst: list) -> "UPoly":
        # lst must already hold mpq values; it is trimmed in place
        obj = object.__new__(cls)
        object.__setattr__(obj, "coeffs", tuple(_trim(lst)))
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("UPoly is immutable")

    @classmethod
    def monomial(cls, k: int, c=1) -> "UPoly":
        return cls._wrap([_ZERO] * k + [mpq(c)])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def __getitem__(self, k: int):
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return _ZERO

    def leading(self):
        return self.coeffs[-1] if self.coeffs else _ZERO

    def is_odd(self) -> bool:
        return all(not c for c in self.coeffs[0::2])

    def is_even(self) -> bool:
        return all(not c for c in self.coeffs[1::2])

    def __eq__(self, other):
        if isinstance(other, UPoly):
            return self.coeffs == other.coeffs
        if _is_scalar(other):
            return self.coeffs == UPoly([other]).coeffs
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __neg__(self):
        return UPoly._wrap([-c for c in self.coeffs])

    def __add__(self, other):
        if _is_scalar(other):
            other = UPoly([other])
        elif not isinstance(other, UPoly):
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return UPoly._wrap(out)

    __radd__ = __add__

    def __sub__(self, other):
        if _is_scalar(other):
            other = UPoly([other])
        elif not isinstance(other, UPoly):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if _is_scalar(other):
            c = mpq(other)
            if not c:
                return UPoly._wrap([])
            return UPoly._wrap([c * x for x in self.coeffs])
        if not isinstance(other, UPoly):
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return UPoly._wrap([])
        out = [_ZERO] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if not x:
                continue
            for j, y in enumerate(b):
                if y:
                    out[i + j] += x * y
        return UPoly._wrap(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not polynomials")
        out = UPoly([1])
        for _ in range(k):
            out = out * self
        return out

    def __call__(self, x):
        """Horner evaluation; for floats the caller's precision scope applies."""
        acc = _ZERO if not isinstance(x, type(mpfr(0))) else mpfr(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "UPoly":
        return UPoly._wrap([k * self.coeffs[k] for k in range(1, len(self.coeffs))])

    def integral(self) -> "UPoly":
        """Antiderivative vanishing at u = 0."""
        return UPoly._wrap([_ZERO] + [c / (k + 1) for k, c in enumerate(self.coeffs)])

    def div_linear(self, root) -> tuple:
        """Synthetic division by (u - root); returns (quotient, remainder)."""
        root = mpq(root)
        c = self.coeffs
        if not c:
            return UPoly._wrap([]), _ZERO
        q = [_ZERO] * (len(c) - 1)
        carry = _ZERO
        for k in range(len(c) - 1, 0, -1):
            carry = c[k] + carry * root
            q[k - 1] = carry
        return UPoly._wrap(q), c[0] + carry * root

    def __repr__(self):
        return f"UPoly({self})"

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for k, c in enumerate(self.coeffs):
            if not c:
                continue
            mag = abs(c)
            if k == 0:
                body = str(mag)
            else:
                mono = "u" if k == 1 else f"u^{k}"
                body = mono if mag == 1 else f"{mag}*{mono}"
            if not parts:
                parts.append(("-" if c < 0 else "") + body)
            else:
                parts.append((" - " if c < 0 else " + ") + body)
        return "".join(parts)


U = UPoly([0, 1])
ONE_MINUS_U2 = UPoly([1, 0, -1])


def apply_D(p: UPoly) -> UPoly:
    """(1 - u^2) p'."""
    dp = [k * p.coeffs[k] for k in range(1, len(p.coeffs))]
    out = dp + [_ZERO, _ZERO]
    for i, c in enumerate(dp):
        out[i + 2] -= c
    return UPoly._wrap(out)


_tau_cache = [UPoly([1]), U]
_tau_lock = threading.Lock()


def tau_basis(n_max: int) -> list:
    """[tau_0, ..., tau_{n_max}], computed once and cached."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    with _tau_lock:
        while len(_tau_cache) <= n_max:
            n = len(_tau_cache) - 1
            _tau_cache.append(apply_D(_tau_cache[n]) * mpq(1, n))
        return _tau_cache[: n_max + 1]


@dataclass(frozen=True)
class TauExpansion:
    """Coordinates of a polynomial in the tau basis: p = sum a[k] tau_k."""

    a: tuple

    @property
    def degree(self) -> int:
        return len(self.a) - 1


def to_tau(p: UPoly, n: int | None = None) -> TauExpansion:
    """Exact triangular change of basis; ``n`` pads the expansion to length n+1."""
    deg = max(p.degree, 0)
    if n is None:
        n = deg
    if p.degree > n:
        raise DegreeTooHigh(f"degree {p.degree} exceeds {n}")
    basis = tau_basis(max(deg, 1))
    rest = list(p.coeffs) + [_ZERO] * (deg + 1 - len(p.coeffs))
    a = [_ZERO] * (n + 1)
    for k in range(deg, -1, -1):
        c = rest[k]
        if not c:
            continue
        # tau_k has leading coefficient (-1)^(k-1) for k >= 1 and 1 for k = 0
        ak = c if (k == 0 or k % 2 == 1) else -c
        a[k] = ak
        for i, t in enumerate(basis[k].coeffs):
            if t:
                rest[i] -= ak * t
    return TauExpansion(tuple(a))


def from_tau(t: TauExpansion) -> UPoly:
    basis = tau_basis(max(t.degree, 1))
    out = [_ZERO] * (t.degree + 1)
    for k, ak in enumerate(t.a):
        if ak:
            for i, c in enumerate(basis[k].coeffs):
                out[i] += ak * c
    return UPoly._wrap(out)


_NORM_GUARD = 32


def norm_n(p: UPoly, n: int, ctx: PrecisionContext):
    """sum |a_i| (pi/2)^(n-i) over the tau coordinates a of p.

    Evaluated with guard bits and rounded once, so the result is within about
    one ulp of the exact value.
    """
    if p.degree > n:
        raise DegreeTooHigh(f"degree {p.degree} exceeds {n}")
    a = to_tau(p, n).a
    wide = ctx.widened(_NORM_GUARD)
    with wide.scope():
        h = pi_const(wide) / 2
        acc = mpfr(0)
        for ai in a:
            acc = acc * h + abs(ai)
    with ctx.scope():
        return mpfr(acc, ctx.bits)

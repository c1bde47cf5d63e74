"""Exact arithmetic in the truncated Breuil-Kisin ring Z_p[[u]] / (p^m, u^M).

The residue field is F_p, so the Witt vectors are Z_p and the Frobenius lift
is u -> u^p on series with coefficients left alone.

>>> P = RingParams(3, 2, 6)
>>> u = TruncatedSeries.gen(P)
>>> (u + 1) * (u - 1) == u * u - 1
True
>>> frobenius(u + 3, 1).coeffs
(3, 0, 0, 1, 0, 0)
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence, Union

from .errors import InsufficientPrecision, ParamsMismatch

INF = math.inf


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def vp(x: int, p: int) -> float:
    """p-adic valuation of an integer, infinity for zero."""
    if x == 0:
        return INF
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def sym(c: int, mod: int) -> int:
    """Symmetric representative of c modulo mod, in (-mod/2, mod/2]."""
    c %= mod
    return c - mod if 2 * c > mod else c


@dataclass(frozen=True)
class RingParams:
    p: int
    p_prec: int
    u_prec: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p = {self.p} is not prime")
        if self.p_prec < 1 or self.u_prec < 1:
            raise ValueError("p_prec and u_prec must be positive")

    @property
    def modulus(self) -> int:
        return self.p ** self.p_prec

    def replace(self, p_prec: int | None = None, u_prec: int | None = None) -> "RingParams":
        return RingParams(self.p, p_prec or self.p_prec, u_prec or self.u_prec)


Scalar = Union["TruncatedSeries", int]


@dataclass(frozen=True)
class TruncatedSeries:
    """An element of Z_p[[u]] modulo (p^m, u^M).

    ``coeffs[j]`` is the coefficient of u^j, always reduced into [0, p^m).
    """

    params: RingParams
    coeffs: tuple

    def __post_init__(self):
        if len(self.coeffs) != self.params.u_prec:
            raise ValueError(
                f"expected {self.params.u_prec} coefficients, got {len(self.coeffs)}"
            )
        mod = self.params.modulus
        if any(not 0 <= c < mod for c in self.coeffs):
            object.__setattr__(self, "coeffs", tuple(c % mod for c in self.coeffs))

    # constructors

    @classmethod
    def from_coeffs(cls, params: RingParams, coeffs: Iterable[int]) -> "TruncatedSeries":
        """Build from any integer coefficient list; pads with zeros and drops degrees >= M."""
        cs = [int(c) for c in coeffs][: params.u_prec]
        cs += [0] * (params.u_prec - len(cs))
        return cls(params, tuple(c % params.modulus for c in cs))

    @classmethod
    def from_terms(cls, params: RingParams, terms: Mapping[int, int]) -> "TruncatedSeries":
        cs = [0] * params.u_prec
        for d, c in terms.items():
            if d < params.u_prec:
                cs[d] += c
        return cls.from_coeffs(params, cs)

    @classmethod
    def const(cls, params: RingParams, c: int) -> "TruncatedSeries":
        return cls.from_terms(params, {0: c})

    @classmethod
    def zero(cls, params: RingParams) -> "TruncatedSeries":
        return cls.const(params, 0)

    @classmethod
    def one(cls, params: RingParams) -> "TruncatedSeries":
        return cls.const(params, 1)

    @classmethod
    def gen(cls, params: RingParams) -> "TruncatedSeries":
        """The variable u."""
        return cls.from_terms(params, {1: 1})

    @classmethod
    def monomial(cls, params: RingParams, c: int, d: int) -> "TruncatedSeries":
        return cls.from_terms(params, {d: c})

    # arithmetic

    def _coerce(self, other: Scalar) -> "TruncatedSeries":
        if isinstance(other, TruncatedSeries):
            if other.params != self.params:
                raise ParamsMismatch(f"{self.params} vs {other.params}")
            return other
        if isinstance(other, int):
            return TruncatedSeries.const(self.params, other)
        return NotImplemented

    def __add__(self, other: Scalar) -> "TruncatedSeries":
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return TruncatedSeries.from_coeffs(self.params, (a + b for a, b in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries.from_coeffs(self.params, (-a for a in self.coeffs))

    def __sub__(self, other: Scalar) -> "TruncatedSeries":
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other: Scalar) -> "TruncatedSeries":
        return (-self) + other

    def __mul__(self, other: Scalar) -> "TruncatedSeries":
        if isinstance(other, int):
            return TruncatedSeries.from_coeffs(self.params, (other * a for a in self.coeffs))
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        M = self.params.u_prec
        out = [0] * M
        b = [(j, c) for j, c in enumerate(o.coeffs) if c]
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, c in b:
                if i + j >= M:
                    break
                out[i + j] += a * c
        return TruncatedSeries.from_coeffs(self.params, out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "TruncatedSeries":
        if k < 0:
            return self.inverse() ** (-k)
        result = TruncatedSeries.one(self.params)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def shift(self, d: int) -> "TruncatedSeries":
        """Multiply by u^d."""
        return TruncatedSeries.from_coeffs(self.params, (0,) * d + self.coeffs)

    # queries

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_unit(self) -> bool:
        return self.coeffs[0] % self.params.p != 0

    def u_valuation(self) -> float:
        for j, c in enumerate(self.coeffs):
            if c:
                return j
        return INF

    def degree(self) -> int:
        for j in range(len(self.coeffs) - 1, -1, -1):
            if self.coeffs[j]:
                return j
        return -1

    def symmetric_coeffs(self) -> tuple:
        mod = self.params.modulus
        return tuple(sym(c, mod) for c in self.coeffs)

    def inverse(self) -> "TruncatedSeries":
        if not self.is_unit():
            raise ZeroDivisionError("not a unit: constant term divisible by p")
        mod, M = self.params.modulus, self.params.u_prec
        a = self.coeffs
        inv0 = pow(a[0], -1, mod)
        b = [inv0] + [0] * (M - 1)
        for k in range(1, M):
            s = sum(a[i] * b[k - i] for i in range(1, k + 1) if a[i])
            b[k] = (-inv0 * s) % mod
        return TruncatedSeries(self.params, tuple(b))

    def lift(self, params: RingParams) -> "TruncatedSeries":
        """Reinterpret under new params using symmetric coefficient lifts."""
        if params.p != self.params.p:
            raise ParamsMismatch("cannot change p")
        return TruncatedSeries.from_coeffs(params, self.symmetric_coeffs())

    def frobenius(self, n: int = 1) -> "TruncatedSeries":
        return frobenius(self, n)

    def __repr__(self) -> str:
        terms = []
        for j, c in enumerate(self.symmetric_coeffs()):
            if c:
                terms.append(f"{c}" if j == 0 else f"{c}*u^{j}")
        body = " + ".join(terms) or "0"
        return f"<{body} mod (p^{self.params.p_prec}, u^{self.params.u_prec}), p={self.params.p}>"


def add(x: TruncatedSeries, y: TruncatedSeries) -> TruncatedSeries:
    return x + y


def mul(x: TruncatedSeries, y: TruncatedSeries) -> TruncatedSeries:
    return x * y


def frobenius(x: TruncatedSeries, n: int) -> TruncatedSeries:
    """Substitute u -> u^(p^n); terms pushed past u^M are dropped."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return x
    q = x.params.p ** n
    M = x.params.u_prec
    out = [0] * M
    for j, c in enumerate(x.coeffs):
        if j * q >= M:
            break
        out[j * q] = c
    return TruncatedSeries(x.params, tuple(out))


@dataclass(frozen=True)
class EisensteinPoly:
    """u^e + c_{e-1} u^{e-1} + ... + c_0 with exact integer coefficients."""

    p: int
    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))
        if not is_prime(self.p):
            raise ValueError(f"p = {self.p} is not prime")
        if len(self.coeffs) < 1:
            raise ValueError("degree must be at least 1")
        if any(c % self.p for c in self.coeffs):
            raise ValueError("p must divide every non-leading coefficient")
        if self.coeffs[0] % (self.p * self.p) == 0:
            raise ValueError("p^2 divides the constant term")

    @classmethod
    def default(cls, p: int, e: int) -> "EisensteinPoly":
        """u^e - p."""
        return cls(p, (-p,) + (0,) * (e - 1))

    @property
    def degree(self) -> int:
        return len(self.coeffs)

    e = degree

    def integer_coeffs(self) -> tuple:
        """Coefficients c_0..c_e including the leading 1."""
        return self.coeffs + (1,)

    def unit_part(self) -> tuple:
        """Coefficients of (E - u^e)/p, a unit of Z_p[[u]]."""
        return tuple(c // self.p for c in self.coeffs)

    def as_series(self, params: RingParams) -> TruncatedSeries:
        if params.p != self.p:
            raise ParamsMismatch("Eisenstein polynomial and ring disagree on p")
        if params.u_prec < self.degree + 1:
            raise InsufficientPrecision(f"u_prec {params.u_prec} < e + 1 = {self.degree + 1}")
        return TruncatedSeries.from_coeffs(params, self.integer_coeffs())

    def __repr__(self) -> str:
        terms = [f"u^{self.degree}"]
        for j in range(self.degree - 1, -1, -1):
            c = self.coeffs[j]
            if c:
                terms.append(f"{c:+d}" + (f"*u^{j}" if j else ""))
        return "E(" + " ".join(terms) + f"; p={self.p})"


def twist_eisenstein(E: EisensteinPoly, n: int, params: RingParams) -> TruncatedSeries:
    """E(u^(p^n)), checked to be exact at the given precision."""
    need = E.p ** n * E.degree + 1
    if params.u_prec < need:
        raise InsufficientPrecision(f"twisting E by {n} needs u_prec >= {need}, have {params.u_prec}")
    return frobenius(E.as_series(params), n)


def dvr_valuation(x: TruncatedSeries, f_alpha: int, f_unit: TruncatedSeries | Sequence[int],
                  strict: bool = False) -> float:
    """u-adic valuation of the image of x in Z_p[[u]]/(u^alpha + p*f_unit).

    The quotient is a DVR with uniformiser u in which p = -f_unit^(-1) u^alpha,
    so (p^m, u^M) maps to u^H with H = min(M, m*alpha).  The image of x is
    therefore exact in the quotient modulo u^H, and it is expanded there into
    p-adic digits degree by degree; the first nonzero digit is the valuation.
    Returns infinity if the image vanishes modulo u^H, or raises
    InsufficientPrecision instead when ``strict``.
    """
    P = x.params
    if f_alpha < 1:
        raise ValueError("alpha must be positive")
    if not isinstance(f_unit, TruncatedSeries):
        f_unit = TruncatedSeries.from_coeffs(P, f_unit)
    elif f_unit.params != P:
        f_unit = f_unit.lift(P)
    if not f_unit.is_unit():
        raise ValueError("f_unit must have constant term prime to p")
    p = P.p
    H = min(P.u_prec, P.p_prec * f_alpha)
    y = f_unit.inverse().coeffs
    c = list(x.coeffs[:H])
    for j in range(H):
        k = -(-(H - j) // f_alpha)
        cj = c[j] % p ** k
        d = cj % p
        if d:
            return j
        q = cj // p
        if q:
            base = j + f_alpha
            for t in range(H - base):
                if y[t]:
                    c[base + t] -= q * y[t]
    if strict:
        raise InsufficientPrecision(f"valuation is at least {H}, the precision horizon")
    return INF


def required_u_prec(max_r: int, e: int, n_max: int, p: int) -> int:
    """Smallest u-precision keeping every twist and E-operation of a session exact."""
    if min(max_r, e, p) < 1 or n_max < 0:
        raise ValueError("inputs must be positive")
    e_tilde = -(-e // (p - 1))
    bound = p ** n_max * max(max_r, e, e_tilde) + 1
    if bound > sys.maxsize:
        raise OverflowError(f"required precision {bound} exceeds the platform integer range")
    return bound

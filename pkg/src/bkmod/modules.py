"""Generalised Breuil-Kisin modules in two representations.

Summand form is a direct sum of the four cyclic shapes

    Free        S
    Ppow(a)     S / p^a
    PUr(a, r)   S / (p^a, u^r)
    FUr(al,x,r) S / (u^al + p x, u^r),   x a unit

with S = Z_p[[u]].  Presentation form is a relation matrix, used by the
oracle for anything outside those shapes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .ring import RingParams, TruncatedSeries, frobenius

KINDS = ("Free", "Ppow", "PUr", "FUr")


def _poly(coeffs: Iterable[int]) -> tuple:
    cs = [int(c) for c in coeffs]
    while len(cs) > 1 and cs[-1] == 0:
        cs.pop()
    return tuple(cs) or (0,)


def poly_str(coeffs: Sequence[int]) -> str:
    """1+u, 2-3u^2, ..."""
    out = ""
    for j, c in enumerate(coeffs):
        if not c:
            continue
        mono = "" if j == 0 else ("u" if j == 1 else f"u^{j}")
        mag = str(abs(c)) if (abs(c) != 1 or not mono) else ""
        sign = "-" if c < 0 else ("+" if out else "")
        out += sign + mag + mono
    return out or "0"


def frobenius_poly(coeffs: Sequence[int], n: int, p: int) -> tuple:
    """u -> u^(p^n) on an exact integer polynomial."""
    q = p ** n
    out = [0] * ((len(coeffs) - 1) * q + 1)
    for j, c in enumerate(coeffs):
        out[j * q] = c
    return _poly(out)


@dataclass(frozen=True, order=True)
class CyclicSummand:
    """One cyclic summand.  ``unit`` holds exact polynomial coefficients of x."""

    kind: str
    a: int = 0
    alpha: int = 0
    r: int = 0
    unit: tuple = (1,)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown summand kind {self.kind!r}")
        unit = self.unit
        if isinstance(unit, TruncatedSeries):
            unit = unit.symmetric_coeffs()
        elif isinstance(unit, int):
            unit = (unit,)
        object.__setattr__(self, "unit", _poly(unit))
        need = {"Free": (), "Ppow": ("a",), "PUr": ("a", "r"), "FUr": ("alpha", "r")}[self.kind]
        for name in need:
            if getattr(self, name) < 1:
                raise ValueError(f"{self.kind} needs {name} >= 1")

    def check_unit(self, p: int) -> None:
        if self.kind == "FUr" and self.unit[0] % p == 0:
            raise ValueError(f"FUr unit {self.unit} has constant term divisible by p = {p}")

    @property
    def is_finite(self) -> bool:
        return self.kind in ("PUr", "FUr")

    @property
    def p_exponent(self) -> Optional[int]:
        """Smallest k with p^k killing the summand (None for Free).

        For FUr: p x = -u^alpha, so p^k x^k = +-u^(k alpha), which dies once k alpha >= r.
        """
        if self.kind == "Free":
            return None
        if self.kind == "FUr":
            return -(-self.r // self.alpha)
        return self.a

    def twist(self, n: int, p: int) -> "CyclicSummand":
        q = p ** n
        if self.kind == "PUr":
            return CyclicSummand("PUr", a=self.a, r=q * self.r)
        if self.kind == "FUr":
            return CyclicSummand("FUr", alpha=q * self.alpha, r=q * self.r, unit=frobenius_poly(self.unit, n, p))
        return self

    def label(self) -> str:
        if self.kind == "Free":
            return "Free"
        if self.kind == "Ppow":
            return f"Ppow({self.a})"
        if self.kind == "PUr":
            return f"PUr({self.a},{self.r})"
        return f"FUr({self.alpha},{poly_str(self.unit)},{self.r})"

    __str__ = label


def Free() -> CyclicSummand:
    return CyclicSummand("Free")


def Ppow(a: int) -> CyclicSummand:
    return CyclicSummand("Ppow", a=a)


def PUr(a: int, r: int) -> CyclicSummand:
    return CyclicSummand("PUr", a=a, r=r)


def FUr(alpha: int, unit, r: int) -> CyclicSummand:
    return CyclicSummand("FUr", alpha=alpha, r=r, unit=unit)


@dataclass(frozen=True)
class Presentation:
    """Relations among ``ngens`` generators, one row per relation.

    With ``truncated`` the module is (S/(p^m, u^M))^g / rows, always finite.
    Otherwise it is S^g / rows with the entries read as exact polynomials
    (symmetric lifts), and the oracle only ever looks at its truncations.
    """

    params: RingParams
    ngens: int
    relations: tuple = ()
    truncated: bool = True

    def __post_init__(self):
        rows = []
        for row in self.relations:
            row = tuple(row)
            if len(row) != self.ngens:
                raise ValueError("relation row length differs from the number of generators")
            rows.append(tuple(x if isinstance(x, TruncatedSeries) else TruncatedSeries.from_coeffs(self.params, _as_list(x)) for x in row))
        for row in rows:
            for x in row:
                if x.params != self.params:
                    raise ValueError("relation entries must share the presentation params")
        object.__setattr__(self, "relations", tuple(rows))

    @property
    def p(self) -> int:
        return self.params.p

    def integer_relations(self) -> list:
        """Relations as lists of exact integer coefficient tuples."""
        return [[x.symmetric_coeffs() for x in row] for row in self.relations]

    def twist(self, n: int) -> "Presentation":
        if n == 0:
            return self
        q = self.p ** n
        new = self.params.replace(u_prec=q * self.params.u_prec)
        rows = tuple(tuple(frobenius(x.lift(new), n) for x in row) for row in self.relations)
        return Presentation(new, self.ngens, rows, self.truncated)

    def direct_sum(self, other: "Presentation") -> "Presentation":
        if self.truncated != other.truncated or self.p != other.p:
            raise ValueError("cannot sum presentations of different flavours")
        params = RingParams(self.p, max(self.params.p_prec, other.params.p_prec), max(self.params.u_prec, other.params.u_prec))
        if self.truncated and self.params != other.params:
            raise ValueError("truncated presentations must share params to be summed")
        zero = TruncatedSeries.zero(params)
        rows = [tuple(x.lift(params) for x in row) + (zero,) * other.ngens for row in self.relations]
        rows += [(zero,) * self.ngens + tuple(x.lift(params) for x in row) for row in other.relations]
        return Presentation(params, self.ngens + other.ngens, tuple(rows), self.truncated)


def _as_list(x):
    if isinstance(x, int):
        return [x]
    return list(x)


@dataclass(frozen=True)
class BKModule:
    """A module in summand form, presentation form, or both.

    ``summands`` is None when only the presentation is known; an empty tuple
    is the zero module.
    """

    params: RingParams
    summands: Optional[tuple] = ()
    presentation: Optional[Presentation] = None

    def __post_init__(self):
        if self.summands is None and self.presentation is None:
            raise ValueError("need summands or a presentation")
        if self.summands is not None:
            ss = tuple(sorted(self.summands))
            for s in ss:
                s.check_unit(self.params.p)
            object.__setattr__(self, "summands", ss)

    @classmethod
    def of(cls, p: int, *summands: CyclicSummand, p_prec: int = 1, u_prec: int = 1) -> "BKModule":
        return cls(RingParams(p, p_prec, u_prec), tuple(summands))

    @classmethod
    def from_presentation(cls, pres: Presentation) -> "BKModule":
        return cls(pres.params, None, pres)

    @property
    def p(self) -> int:
        return self.params.p

    @property
    def has_summands(self) -> bool:
        return self.summands is not None

    def is_zero(self) -> bool:
        return self.summands == ()

    def __add__(self, other: "BKModule") -> "BKModule":
        if self.p != other.p or not (self.has_summands and other.has_summands):
            raise ValueError("direct sums need summand form over the same p")
        return BKModule(self.params, self.summands + other.summands)

    def label(self) -> str:
        if self.summands is None:
            return f"<presentation: {self.presentation.ngens} gens, {len(self.presentation.relations)} relations>"
        return " + ".join(s.label() for s in self.summands) or "0"

    __str__ = label


def twist(M: BKModule, n: int) -> BKModule:
    """Base change along the n-th power of Frobenius."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return M
    p = M.p
    summands = None if M.summands is None else tuple(s.twist(n, p) for s in M.summands)
    pres = None if M.presentation is None else M.presentation.twist(n)
    params = pres.params if pres is not None else M.params
    return BKModule(params, summands, pres)


def summand_presentation(s: CyclicSummand, p: int) -> Presentation:
    """Presentation of a single summand.

    Finite summands are presented over S/(p^A, u^r) with A the p-exponent,
    so the ring truncation itself supplies the relations p^A and u^r.
    Free and Ppow get exact (untruncated) presentations.
    """
    if s.kind == "PUr":
        return Presentation(RingParams(p, s.a, s.r), 1, (), True)
    if s.kind == "FUr":
        P = RingParams(p, s.p_exponent, s.r)
        f = TruncatedSeries.from_terms(P, {s.alpha: 1}) + TruncatedSeries.from_coeffs(P, s.unit) * p
        return Presentation(P, 1, ((f,),), True)
    if s.kind == "Ppow":
        P = RingParams(p, s.a + 1, 1)
        return Presentation(P, 1, ((TruncatedSeries.const(P, p ** s.a),),), False)
    P = RingParams(p, 1, 1)
    return Presentation(P, 1, (), False)


def to_presentation(M: BKModule) -> Presentation:
    """One presentation for the whole module (block diagonal over summands)."""
    if M.presentation is not None:
        return M.presentation
    p = M.p
    if not M.summands:
        return Presentation(RingParams(p, 1, 1), 0, (), True)
    finite = all(s.is_finite for s in M.summands)
    if finite:
        m = max(s.p_exponent for s in M.summands)
        R = max(s.r for s in M.summands)
        P = RingParams(p, m, R)
    else:
        m = max((s.p_exponent or 0) for s in M.summands) + 1
        R = max([s.r for s in M.summands if s.is_finite] + [s.alpha + 1 for s in M.summands if s.kind == "FUr"] + [1])
        P = RingParams(p, m, R + 1)
    g = len(M.summands)
    zero = TruncatedSeries.zero(P)
    rows = []
    for i, s in enumerate(M.summands):
        def unit_row(x):
            row = [zero] * g
            row[i] = x
            return tuple(row)
        if s.kind == "PUr":
            if s.a < P.p_prec or not finite:
                rows.append(unit_row(TruncatedSeries.const(P, p ** s.a)))
            if s.r < P.u_prec or not finite:
                rows.append(unit_row(TruncatedSeries.monomial(P, 1, s.r)))
        elif s.kind == "FUr":
            f = TruncatedSeries.from_terms(P, {s.alpha: 1}) + TruncatedSeries.from_coeffs(P, s.unit) * p
            rows.append(unit_row(f))
            if s.r < P.u_prec or not finite:
                rows.append(unit_row(TruncatedSeries.monomial(P, 1, s.r)))
            if not finite:
                rows.append(unit_row(TruncatedSeries.const(P, p ** s.p_exponent)))
        elif s.kind == "Ppow":
            rows.append(unit_row(TruncatedSeries.const(P, p ** s.a)))
    return Presentation(P, g, tuple(rows), finite)


@dataclass(frozen=True)
class FiltrationPieces:
    """u-power torsion, u-torsion-free p-power torsion, free rank, and the reflexive-hull cokernel."""

    u_infty: BKModule
    tor_u_tf: BKModule
    free_rank: int
    mbar: BKModule

    def __post_init__(self):
        if self.free_rank < 0:
            raise ValueError("free rank must be non-negative")
        for name in ("u_infty", "mbar"):
            piece = getattr(self, name)
            if piece.summands is not None and any(not s.is_finite for s in piece.summands):
                raise ValueError(f"{name} must be killed by powers of p and u")
        if self.tor_u_tf.summands is not None and any(s.kind != "Ppow" for s in self.tor_u_tf.summands):
            raise ValueError("tor_u_tf must consist of Ppow summands")

    @classmethod
    def build(cls, p: int, u_infty=(), tor_u_tf=(), free_rank: int = 0, mbar=()) -> "FiltrationPieces":
        P = RingParams(p, 1, 1)
        return cls(BKModule(P, tuple(u_infty)), BKModule(P, tuple(tor_u_tf)), free_rank, BKModule(P, tuple(mbar)))


def filtration(M: BKModule, mbar: Optional[BKModule] = None) -> FiltrationPieces:
    """Sort summands into the canonical pieces; mbar is supplied, not computed."""
    if M.summands is None:
        raise ValueError("summand form required; use oracle.brute_force_filtration for presentations")
    P = M.params
    u_inf = tuple(s for s in M.summands if s.is_finite)
    tor = tuple(s for s in M.summands if s.kind == "Ppow")
    free = sum(1 for s in M.summands if s.kind == "Free")
    return FiltrationPieces(BKModule(P, u_inf), BKModule(P, tor), free, mbar if mbar is not None else BKModule(P, ()))


def assemble(pieces: FiltrationPieces) -> BKModule:
    """The split module u_infty + tor_u_tf + Free^rank (mbar is not part of it)."""
    P = pieces.u_infty.params
    return BKModule(P, pieces.u_infty.summands + pieces.tor_u_tf.summands + (Free(),) * pieces.free_rank)

"""Closed-form length formulas for E-torsion and mod-E reductions.

All lengths are O_K-lengths, i.e. log_p of the cardinality since the residue
field is F_p.  Every function here has an oracle counterpart in
``bkmod.oracle`` and the test suite checks them against each other.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

from .errors import InfiniteModule, MixedPPower, UnsupportedSummand
from .modules import BKModule, CyclicSummand, FiltrationPieces, frobenius_poly
from .ring import EisensteinPoly, RingParams, TruncatedSeries, dvr_valuation

INF = math.inf

# Test-build hook: BKCTL_INJECT_FAULT=off-by-one perturbs the p-torsion fast path
# so that the oracle cross-checks in `bkctl verify` can be seen to fail.
FAULT_ENV = "BKCTL_INJECT_FAULT"


def _fault() -> bool:
    return os.environ.get(FAULT_ENV, "") == "off-by-one"


def in_valuation_window(p: int, e: int, alpha: int) -> bool:
    """1 <= alpha <= floor(e/(p-1)) < p."""
    top = e // (p - 1)
    return 1 <= alpha <= top < p


def fur_e_valuation(E: EisensteinPoly, alpha: int, unit: Sequence[int], cap: float = INF) -> float:
    """Valuation of E in the DVR S/(u^alpha + p x), computed honestly, capped at ``cap``.

    The horizon is chosen past both e and the cap so that a finite answer
    below the cap is certified.
    """
    e = E.degree
    horizon = (e if cap == INF else min(cap, 4 * e)) + alpha + e + 1
    m = -(-horizon // alpha) + 1
    P = RingParams(E.p, m, horizon)
    v = dvr_valuation(E.as_series(P), alpha, TruncatedSeries.from_coeffs(P, unit))
    return min(v, cap)


def upsilon_n_E(p: int, e: int, alpha: int, n: int, E: Optional[EisensteinPoly] = None,
                unit: Sequence[int] = (1,)) -> float:
    """Valuation of E in S/(u^(p^n alpha) + p x^(p^n)).

    Inside the window 1 <= alpha <= floor(e/(p-1)) < p, and away from the
    coincidence e = p^n alpha where the two leading terms can cancel, this is
    min(e, p^n alpha).  Everywhere else it is computed by dvr_valuation.
    """
    if E is None:
        E = EisensteinPoly.default(p, e)
    elif E.degree != e or E.p != p:
        raise ValueError("E does not match (p, e)")
    an = p ** n * alpha
    if in_valuation_window(p, e, alpha) and an != e:
        return min(e, an)
    return fur_e_valuation(E, an, frobenius_poly(tuple(unit), n, p))


@dataclass(frozen=True)
class ValuationTable:
    p: int
    e: int
    alpha: int
    values: tuple

    def __getitem__(self, n: int) -> float:
        if n < len(self.values):
            return self.values[n]
        return self.values[-1]


def valuation_table(p: int, e: int, alpha: int, n_max: int = 3, E: Optional[EisensteinPoly] = None,
                    unit: Sequence[int] = (1,)) -> ValuationTable:
    return ValuationTable(p, e, alpha, tuple(upsilon_n_E(p, e, alpha, n, E, unit) for n in range(n_max + 1)))


def paper_case_table(p: int, e: int, alpha: int, n: int) -> int:
    """The three-case description: alpha at n = 0, min(e, p alpha) at n = 1, e beyond."""
    if n == 0:
        return alpha
    if n == 1:
        return min(e, p * alpha)
    return e


SummandLike = Union[CyclicSummand, tuple]


def _as_summand(s: SummandLike) -> CyclicSummand:
    if isinstance(s, CyclicSummand):
        return s
    kind = s[0]
    if kind == "PUr":
        return CyclicSummand("PUr", a=1, r=s[1]) if len(s) == 2 else CyclicSummand("PUr", a=s[1], r=s[2])
    if kind == "FUr":
        return CyclicSummand("FUr", alpha=s[1], r=s[2], unit=s[3] if len(s) > 3 else (1,))
    raise UnsupportedSummand(f"not a u-power torsion summand: {s!r}")


def len_u_torsion_sum(summands: Iterable[SummandLike], p: int, e_or_table, n: int) -> int:
    """Sum of min(v, p^n r_j) with v = e for p-torsion summands and v = upsilon_n(E) for FUr."""
    E = None
    table = None
    if isinstance(e_or_table, EisensteinPoly):
        E = e_or_table
        e = E.degree
    elif isinstance(e_or_table, ValuationTable):
        table = e_or_table
        e = table.e
    else:
        e = int(e_or_table)
    q = p ** n
    total = 0
    for s in map(_as_summand, summands):
        if s.kind == "PUr":
            if s.a != 1:
                raise MixedPPower(f"{s.label()} is not p-torsion; use len_u_torsion_general")
            total += min(e, q * s.r + (1 if _fault() else 0))
        elif s.kind == "FUr":
            if table is not None and table.alpha == s.alpha and s.unit == (1,):
                v = table[n]
            else:
                v = upsilon_n_E(p, e, s.alpha, n, E, s.unit)
            total += min(v, q * s.r)
        else:
            raise UnsupportedSummand(f"{s.label()} is not u-power torsion")
    return int(total)


def pur_filtration_lengths(a: int, R: int, e: int) -> list:
    """Lengths of the graded pieces p^k N / p^(k+1) N of N = (S/(p^a, u^R))/E.

    N is O_K/(pi^(e a), pi^R) and p = pi^e times a unit, so piece k is
    pi^(ek) O_K modulo pi^(e(k+1)) and pi^R.
    """
    return [max(0, min(e, R - e * k)) for k in range(a)]


def len_u_torsion_general(M: BKModule, E: EisensteinPoly, n: int) -> int:
    """E-torsion (equivalently mod-E) length of a u-power torsion module twisted n times.

    Mixed p-power summands PUr(a, r) are filtered by powers of p; p-torsion
    and FUr summands use len_u_torsion_sum.
    """
    if M.summands is None:
        raise UnsupportedSummand("summand form required")
    e, p = E.degree, M.p
    total = 0
    simple = []
    for s in M.summands:
        if s.kind == "PUr" and s.a > 1:
            total += sum(pur_filtration_lengths(s.a, p ** n * s.r, e))
        elif s.is_finite:
            simple.append(s)
        else:
            raise UnsupportedSummand(f"{s.label()} is not u-power torsion")
    return total + len_u_torsion_sum(simple, p, E, n)


def _oracle_fallback(M: BKModule, E: EisensteinPoly, n: int, what: str, p_infty_only: bool = False) -> int:
    if M.presentation is None:
        raise UnsupportedSummand("no fast path and no presentation available")
    from . import oracle

    if what == "etor":
        return oracle.e_torsion_length(M, E, n)
    return oracle.mod_e_length(M, E, n, p_infty_only)


def e_torsion_length(M: BKModule, E: EisensteinPoly, n: int) -> int:
    """Length of M^(n)[E].  Free and Ppow summands have no E-torsion."""
    if M.summands is None:
        return _oracle_fallback(M, E, n, "etor")
    finite = BKModule(M.params, tuple(s for s in M.summands if s.is_finite))
    return len_u_torsion_general(finite, E, n)


def mod_e_length(M: BKModule, E: EisensteinPoly, n: int, p_infty_only: bool = False) -> int:
    """Length of M^(n)/E, or of its p-power torsion.

    Ppow(a) contributes e*a for every n; a Free summand contributes nothing to
    the torsion and makes the full quotient infinite.
    """
    if M.summands is None:
        return _oracle_fallback(M, E, n, "mode", p_infty_only)
    e = E.degree
    total = 0
    for s in M.summands:
        if s.kind == "Free":
            if not p_infty_only:
                raise InfiniteModule("a free summand has infinite length modulo E")
        elif s.kind == "Ppow":
            total += e * s.a
    finite = BKModule(M.params, tuple(s for s in M.summands if s.is_finite))
    return total + len_u_torsion_general(finite, E, n)


@dataclass(frozen=True)
class LengthContributions:
    tor_u_tf: int
    u_infty: int
    mbar: int

    @property
    def total(self) -> int:
        return self.tor_u_tf + self.u_infty + self.mbar

    def as_tuple(self) -> tuple:
        return (self.tor_u_tf, self.u_infty, self.mbar)


def length_contributions(pieces: FiltrationPieces, E: EisensteinPoly, n: int) -> LengthContributions:
    """The three pieces of the length of (M^(n)/E)[p^infty]."""
    return LengthContributions(
        mod_e_length(pieces.tor_u_tf, E, n, p_infty_only=True),
        mod_e_length(pieces.u_infty, E, n, p_infty_only=True),
        e_torsion_length(pieces.mbar, E, n),
    )


@dataclass(frozen=True)
class GenBKTotal:
    etor: int
    mod_e_pinfty: int


def len_genBK_total(pieces: FiltrationPieces, E: EisensteinPoly, n: int) -> GenBKTotal:
    """E-torsion comes from M[u^infty] alone; the p-infinity part of M/E has three pieces."""
    return GenBKTotal(e_torsion_length(pieces.u_infty, E, n), length_contributions(pieces, E, n).total)

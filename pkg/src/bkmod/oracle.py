"""Brute-force ground truth for lengths, kernels and annihilators.

A finite module over S/(p^m, u^R) with g generators is the abelian group
(Z/p^m)^(gR) modulo the span of u^j * relation; ambient coordinate i*R + j
is the coefficient of u^j on generator i.  Smith reduction over Z/p^m turns
that into cyclic coordinates, and from there:

* modules with at most ``budget`` elements are listed outright and kernels
  are found by testing every element;
* larger ones use exact linear algebra (left kernels over Z/p^m);
* beyond ``DIM_CAP`` ambient coordinates, the kernel of an endomorphism is
  counted through |ker| = |coker|, which holds for any endomorphism of a
  finite group, and the cokernel is computed on a smaller ring (see
  ``mod_e_length``).

Nothing here calls the closed-form formulas in ``bkmod.lengths``.
"""

from __future__ import annotations

import builtins
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import BudgetExceeded, HypothesisUnmet, InfiniteModule, NotPPower, SearchInconclusive
from .linalg import FinGroup, matmul_mod
from .modules import (BKModule, FiltrationPieces, Presentation, summand_presentation,
                      to_presentation)
from .ring import EisensteinPoly, RingParams, TruncatedSeries

DEFAULT_BUDGET = 10 ** 6
DIM_CAP = 256


def default_budget() -> int:
    env = os.environ.get("BKCTL_BUDGET")
    return int(env) if env else DEFAULT_BUDGET


def _poly_of(s) -> tuple:
    """Exact integer coefficients of a scalar given as int, sequence or TruncatedSeries."""
    if isinstance(s, TruncatedSeries):
        return s.symmetric_coeffs()
    if isinstance(s, int):
        return (s,)
    return tuple(int(c) for c in s)


def relation_rows(int_relations, g: int, R: int, mod: int) -> np.ndarray:
    """All u^j multiples of the relations, truncated at u^R, as ambient rows."""
    rows = []
    for rel in int_relations:
        degs = [max((j for j, c in builtins.enumerate(x) if c % mod), default=-1) for x in rel]
        lows = [min((j for j, c in builtins.enumerate(x) if c % mod), default=R) for x in rel]
        if all(d < 0 for d in degs):
            continue
        low = min(lows)
        for s in range(R - low):
            v = np.zeros(g * R, dtype=object)
            for i, x in builtins.enumerate(rel):
                for j, c in builtins.enumerate(x):
                    if c and j + s < R:
                        v[i * R + j + s] = c % mod
            rows.append(v)
    if not rows:
        return np.zeros((0, g * R), dtype=object)
    return np.array(rows, dtype=object)


def scalar_ambient(s, g: int, R: int, mod: int) -> np.ndarray:
    """Ambient matrix of multiplication by s (row-vector convention)."""
    coeffs = _poly_of(s)
    F = np.zeros((g * R, g * R), dtype=object)
    for i in range(g):
        for j in range(R):
            for k, c in builtins.enumerate(coeffs):
                if c and j + k < R:
                    F[i * R + j, i * R + j + k] = c % mod
    return F


class EnumeratedModule:
    """A finite module over S/(p^m, u^R), optionally a submodule given by generators.

    ``sub`` holds coordinate rows spanning the submodule (None for the whole
    module); ``listed`` caches its complete element list when it was found
    by enumeration.
    """

    def __init__(self, p: int, m: int, g: int, R: int, relations: np.ndarray,
                 sub: Optional[np.ndarray] = None, listed: Optional[np.ndarray] = None,
                 group: Optional[FinGroup] = None):
        self.p, self.m, self.g, self.R = p, m, g, R
        self.relations = relations
        self.group = group if group is not None else FinGroup(p, m, g * R, relations)
        self.sub = sub
        self.listed = listed
        self._actions = {}

    @property
    def params(self) -> RingParams:
        return RingParams(self.p, self.m, self.R)

    @property
    def length(self) -> int:
        if self.listed is not None:
            return _log_p(len(self.listed), self.p)
        if self.sub is None:
            return self.group.length
        return self.group.subgroup_length(self.sub)

    @property
    def cardinality(self) -> int:
        if self.listed is not None:
            return len(self.listed)
        return self.p ** self.length

    def elements(self, budget: Optional[int] = None) -> np.ndarray:
        budget = default_budget() if budget is None else budget
        if self.listed is not None:
            return self.listed
        if self.sub is not None:
            if self.cardinality > budget:
                raise BudgetExceeded(f"{self.cardinality} elements exceed budget {budget}")
            Z = self.group.elements(self.group.cardinality if self.group.cardinality <= budget else budget)
            keep = np.array([self.group.contains(self.sub, z) for z in Z], dtype=bool)
            self.listed = Z[keep]
            return self.listed
        self.listed = self.group.elements(budget)
        return self.listed

    def action(self, s) -> np.ndarray:
        """Coordinate matrix of multiplication by s."""
        key = _poly_of(s)
        if key not in self._actions:
            F = scalar_ambient(key, self.g, self.R, self.p ** self.m)
            self._actions[key] = self.group.hom_matrix(F, self.group)
        return self._actions[key]

    def act(self, s, Z: np.ndarray) -> np.ndarray:
        Z = np.asarray(Z).reshape(-1, self.group.ngens)
        if not self.group.ngens:
            return Z
        return self.group.reduce(matmul_mod(Z, self.action(s), self.p ** self.m))

    def generators(self) -> np.ndarray:
        """Coordinates of the module generators (or of the submodule's spanning set)."""
        if self.sub is not None:
            return self.sub
        amb = np.zeros((self.g, self.g * self.R), dtype=object)
        for i in range(self.g):
            amb[i, i * self.R] = 1
        return self.group.coords(amb)

    def add(self, Z1, Z2) -> np.ndarray:
        return self.group.reduce(np.asarray(Z1) + np.asarray(Z2))

    def __repr__(self) -> str:
        kind = "submodule" if self.sub is not None else "module"
        return f"<EnumeratedModule {kind} p={self.p} length={self.length} over S/(p^{self.m}, u^{self.R})>"


def _log_p(count: int, p: int) -> int:
    k = 0
    c = count
    while c > 1 and c % p == 0:
        c //= p
        k += 1
    if c != 1:
        raise NotPPower(f"cardinality {count} is not a power of {p}")
    return k


def module_from_presentation(pres: Presentation, N: Optional[int] = None, R: Optional[int] = None) -> EnumeratedModule:
    """The finite module M / (p^N, u^R); a truncated presentation defaults to its own precision."""
    P = pres.params
    if pres.truncated:
        N = P.p_prec if N is None else min(N, P.p_prec)
        R = P.u_prec if R is None else min(R, P.u_prec)
    elif N is None or R is None:
        raise InfiniteModule("untruncated presentation: choose a truncation (N, R)")
    g = pres.ngens
    if g * R > 4 * DIM_CAP:
        raise BudgetExceeded(f"{g * R} ambient coordinates exceed the reduction cap")
    mod = pres.p ** N
    rels = relation_rows(pres.integer_relations(), g, R, mod)
    return EnumeratedModule(pres.p, N, g, R, rels)


def enumerate_module(M: BKModule, budget: Optional[int] = None) -> EnumeratedModule:
    """Materialise a finite module and list its elements."""
    budget = default_budget() if budget is None else budget
    if M.summands is not None and any(not s.is_finite for s in M.summands):
        raise InfiniteModule("free or Ppow summand: quotient first")
    pres = M.presentation if M.presentation is not None else to_presentation(M)
    if not pres.truncated:
        raise InfiniteModule("untruncated presentation: quotient first")
    amb = pres.ngens * pres.params.u_prec
    if amb > DIM_CAP and pres.p ** (pres.params.p_prec * amb) > budget:
        raise BudgetExceeded(f"{amb} ambient coordinates; too large to enumerate")
    N = module_from_presentation(pres)
    if N.cardinality > budget:
        raise BudgetExceeded(f"{N.cardinality} elements exceed budget {budget}")
    N.elements(budget)
    return N


# public alias; it shadows the builtin here, hence builtins.enumerate above
enumerate = enumerate_module


def length_via_cardinality(N: EnumeratedModule) -> int:
    return _log_p(N.cardinality, N.p)


def kernel_of_scalar(N: EnumeratedModule, s, budget: Optional[int] = None, method: str = "auto") -> EnumeratedModule:
    """The submodule of N killed by s."""
    budget = default_budget() if budget is None else budget
    A = N.action(s)
    if method == "enumerate" or (method == "auto" and (N.listed is not None or N.cardinality <= budget)):
        Z = N.elements(budget)
        img = N.act(s, Z) if Z.shape[1] else Z
        keep = ~img.any(axis=1) if Z.shape[1] else np.ones(len(Z), dtype=bool)
        K = Z[keep]
        _log_p(len(K), N.p)
        return EnumeratedModule(N.p, N.m, N.g, N.R, N.relations, sub=K, listed=K, group=N.group)
    if N.sub is not None:
        raise BudgetExceeded("kernels on large submodules need enumeration")
    gens = N.group.kernel(A, N.group)
    return EnumeratedModule(N.p, N.m, N.g, N.R, N.relations, sub=gens, group=N.group)


def nilpotency_bound(N: EnumeratedModule, s) -> int:
    """Smallest B with s^B N = 0, found by repeated application to the generators."""
    Z = N.generators()
    for B in range(0, N.group.length + 1):
        if not N.group.reduce(Z).any():
            return B
        Z = N.act(s, Z)
    raise SearchInconclusive("scalar is not nilpotent on the module")


def u_power_torsion(N: EnumeratedModule, budget: Optional[int] = None) -> EnumeratedModule:
    B = nilpotency_bound(N, (0, 1))
    return kernel_of_scalar(N, (0,) * B + (1,), budget)


def p_power_torsion(N: EnumeratedModule, budget: Optional[int] = None) -> EnumeratedModule:
    B = nilpotency_bound(N, N.p)
    return kernel_of_scalar(N, N.p ** B, budget)


# --- E-torsion and mod-E lengths ---------------------------------------------


@dataclass
class OracleLength:
    value: int
    route: str


def _with_e(pres: Presentation, E: EisensteinPoly, N: int, R: int) -> Presentation:
    """Presentation of M / (E, p^N, u^R) over S/(p^N, u^R)."""
    P = RingParams(pres.p, N, R)
    g = pres.ngens
    zero = TruncatedSeries.zero(P)
    Ecoef = E.integer_coeffs()
    rows = [tuple(TruncatedSeries.from_coeffs(P, x) for x in row) for row in pres.integer_relations()]
    for i in range(g):
        row = [zero] * g
        row[i] = TruncatedSeries.from_coeffs(P, Ecoef)
        rows.append(tuple(row))
    return Presentation(P, g, tuple(rows), True)


def finite_mod_e(pres: Presentation, E: EisensteinPoly) -> int:
    """Length of M/E for a truncated presentation over S/(p^m, u^M).

    u^(e m) lies in (p^m, E) because S/(p^m, E) = O_K/pi^(e m), so the
    quotient can be computed over S/(p^m, u^min(M, e m)).
    """
    m, M = pres.params.p_prec, pres.params.u_prec
    R = min(M, E.degree * m)
    return module_from_presentation(_with_e(pres, E, m, R)).length


def finite_e_torsion(pres: Presentation, E: EisensteinPoly, budget: Optional[int] = None,
                     strict: bool = False) -> OracleLength:
    """E-torsion length by enumeration, else by linear algebra, else by the index formula.

    With ``strict`` only enumeration is allowed and a larger module raises BudgetExceeded.
    """
    budget = default_budget() if budget is None else budget
    amb = pres.ngens * pres.params.u_prec
    Es = E.integer_coeffs()
    if strict:
        if amb > DIM_CAP and pres.p ** (pres.params.p_prec * amb) > budget:
            raise BudgetExceeded(f"{amb} ambient coordinates; too large to enumerate")
        N = module_from_presentation(pres)
        if N.cardinality > budget:
            raise BudgetExceeded(f"{N.cardinality} elements exceed budget {budget}")
        return OracleLength(length_via_cardinality(kernel_of_scalar(N, Es, budget, "enumerate")), "enumerate")
    if amb <= DIM_CAP:
        N = module_from_presentation(pres)
        if N.cardinality <= budget:
            return OracleLength(length_via_cardinality(kernel_of_scalar(N, Es, budget, "enumerate")), "enumerate")
        return OracleLength(kernel_of_scalar(N, Es, budget, "linalg").length, "linalg")
    return OracleLength(finite_mod_e(pres, E), "index")


def stable_e_torsion(pres: Presentation, E: EisensteinPoly, rounds: int = 3) -> int:
    """E-torsion of an untruncated presentation, read modulo p^K with K = p_prec.

    The kernel of E on M/(p^K, u^(R + eK)) maps onto the image of the true
    kernel in M/(p^K, u^R), because u^(eK) = E z in M/p^K.  The image length
    is recomputed with R doubled until it stops changing.
    """
    K = pres.params.p_prec
    gap = E.degree * K
    deg = max([len(x) for row in pres.integer_relations() for x in row] + [1])
    R = 2 * deg + 2
    last = None
    for _ in range(rounds):
        src = module_from_presentation(pres, K, R + gap)
        tgt = module_from_presentation(pres, K, R)
        ker = kernel_of_scalar(src, E.integer_coeffs(), method="linalg")
        val = _image_length(src, ker.sub, tgt)
        if val == last:
            return val
        last = val
        R *= 2
    raise HypothesisUnmet("E-torsion image did not stabilise within the truncation budget")


def _projection(src: EnumeratedModule, tgt: EnumeratedModule) -> np.ndarray:
    F = np.zeros((src.g * src.R, tgt.g * tgt.R), dtype=object)
    for i in range(src.g):
        for j in range(min(src.R, tgt.R)):
            F[i * src.R + j, i * tgt.R + j] = 1
    return F


def _image_length(src: EnumeratedModule, gens: np.ndarray, tgt: EnumeratedModule) -> int:
    if gens is None or len(gens) == 0 or not tgt.group.ngens:
        return 0
    A = src.group.hom_matrix(_projection(src, tgt), tgt.group)
    img = tgt.group.reduce(matmul_mod(np.asarray(gens, dtype=object), A, src.p ** src.m))
    return tgt.group.subgroup_length(img)


def torsion_mod_e(pres: Presentation, E: EisensteinPoly, k0: Optional[int] = None) -> int:
    """Length of (M/E)[p^infty] for an untruncated presentation.

    With T(k) = length of M/(E, p^k), a finitely generated O_K-module with
    torsion killed by p^k0 has T(k) = t + e k rank for k >= k0.
    """
    e = E.degree
    k = k0 if k0 is not None else pres.params.p_prec

    def T(k):
        return module_from_presentation(_with_e(pres, E, k, e * k)).length

    t0, t1, t2 = T(k), T(k + 1), T(k + 2)
    if t1 - t0 != t2 - t1 or (t1 - t0) % e:
        raise HypothesisUnmet("p-power torsion of M/E not stable at the chosen precision")
    return t0 - k * (t1 - t0)


def e_torsion_length(M: BKModule, E: EisensteinPoly, n: int, budget: Optional[int] = None,
                     detail: bool = False, strict: bool = False):
    """Oracle length of M^(n)[E], summand by summand when summands are known.

    ``strict`` restricts finite pieces to plain enumeration within the budget.
    """
    results = []
    if M.summands is not None:
        for s in M.summands:
            pres = summand_presentation(s, M.p)
            if s.is_finite:
                results.append(finite_e_torsion(pres.twist(n), E, budget, strict))
            elif s.kind == "Ppow":
                results.append(OracleLength(stable_e_torsion(pres, E), "stable"))
            else:
                # S has no p-torsion, so S[E] = p S[E] whenever (S/p)[E] = 0, and then S[E] = 0.
                v = stable_e_torsion(Presentation(RingParams(M.p, 1, 1), 1, (), False), E)
                if v:
                    raise HypothesisUnmet("(S/p)[E] is nonzero")
                results.append(OracleLength(0, "stable"))
    else:
        pres = M.presentation.twist(n)
        if pres.truncated:
            results.append(finite_e_torsion(pres, E, budget, strict))
        else:
            results.append(OracleLength(stable_e_torsion(pres, E), "stable"))
    total = sum(r.value for r in results)
    if detail:
        return OracleLength(total, "+".join(sorted({r.route for r in results})) or "empty")
    return total


def mod_e_length(M: BKModule, E: EisensteinPoly, n: int, p_infty_only: bool = False) -> int:
    """Oracle length of M^(n)/E (or its p-power torsion)."""
    total = 0
    if M.summands is not None:
        for s in M.summands:
            pres = summand_presentation(s, M.p)
            if s.is_finite:
                total += finite_mod_e(pres.twist(n), E)
            elif s.kind == "Ppow":
                P = RingParams(M.p, s.a, E.degree * s.a)
                total += finite_mod_e(Presentation(P, 1, (), True), E)
            else:
                if not p_infty_only:
                    raise InfiniteModule("free summand modulo E is infinite")
                total += torsion_mod_e(pres.twist(n), E)
        return total
    pres = M.presentation.twist(n)
    if pres.truncated:
        return finite_mod_e(pres, E)
    if p_infty_only:
        return torsion_mod_e(pres, E)
    e = E.degree
    k = pres.params.p_prec
    t0 = module_from_presentation(_with_e(pres, E, k, e * k)).length
    t1 = module_from_presentation(_with_e(pres, E, k + 1, e * (k + 1))).length
    if t1 != t0:
        raise InfiniteModule("M/E has positive rank")
    return t0


# --- annihilators --------------------------------------------------------------


@dataclass(frozen=True)
class AnnihilatorShape:
    p_kills: bool
    alpha: Optional[int]
    simple_element: Optional[tuple]  # (alpha, unit as TruncatedSeries)
    precision: tuple  # (m, R): the ring S/(p^m, u^R) the search ran over


def _ring_group(N: EnumeratedModule, extra: int = 0) -> FinGroup:
    return FinGroup(N.p, N.m, N.R + extra, np.zeros((0, N.R + extra), dtype=object))


def _sum_group(N: EnumeratedModule, k: int) -> FinGroup:
    d = N.group.ngens
    diag = np.zeros((k * d, k * d), dtype=object)
    for b in range(k):
        for i, c in builtins.enumerate(N.group.orders):
            diag[b * d + i, b * d + i] = N.p ** c
    return FinGroup(N.p, N.m, k * d, diag)


def _evaluation_rows(N: EnumeratedModule, gens: np.ndarray, scalars) -> np.ndarray:
    """Row t = concatenated coordinates of scalars[t] * gens[l] over all l."""
    rows = []
    for s in scalars:
        rows.append(np.concatenate([N.act(s, g.reshape(1, -1))[0] for g in gens]) if len(gens) else np.zeros(0, dtype=object))
    return np.array(rows, dtype=object).reshape(len(scalars), -1)


def annihilator_generators(N: EnumeratedModule) -> np.ndarray:
    """Ann(N) inside S/(p^m, u^R), as coefficient rows of length R."""
    gens = N.generators()
    gens = gens[np.asarray(N.group.reduce(gens)).any(axis=1)] if len(gens) else gens
    ring = _ring_group(N)
    if len(gens) == 0:
        return np.eye(N.R, dtype=object)
    tgt = _sum_group(N, len(gens))
    rows = _evaluation_rows(N, gens, [(0,) * j + (1,) for j in range(N.R)])
    return ring.kernel(tgt.coords(rows), tgt)


def annihilates(N: EnumeratedModule, s) -> bool:
    gens = N.generators()
    return not N.group.reduce(N.act(s, gens)).any() if len(gens) and N.group.ngens else True


def annihilator_shape(N: EnumeratedModule) -> AnnihilatorShape:
    p, m, R = N.p, N.m, N.R
    prec = (m, R)
    if N.length == 0:
        return AnnihilatorShape(True, 0, None, prec)
    p_kills = annihilates(N, p)
    ann = annihilator_generators(N)
    ring = _ring_group(N)
    pgens = np.zeros((R, R), dtype=object)
    for j in range(R):
        pgens[j, j] = p
    span = np.concatenate([ann.reshape(-1, R), pgens]) if len(ann) else pgens
    alpha = None
    for j in range(R + 1):
        v = np.zeros(R, dtype=object)
        if j < R:
            v[j] = 1
        if j == R or ring.contains(span, v):
            alpha = j
            break
    simple = None
    if not p_kills and alpha:
        simple = _simple_element(N, alpha)
    return AnnihilatorShape(p_kills, alpha, simple, prec)


def _simple_element(N: EnumeratedModule, alpha: int):
    """Look for u^alpha + p x in Ann(N) with x a unit: constants first, then exactly."""
    p, m, R = N.p, N.m, N.R
    P = RingParams(p, m, R)
    ua = TruncatedSeries.monomial(P, 1, alpha) if alpha < R else TruncatedSeries.zero(P)
    for c in range(1, p):
        if annihilates(N, ua + p * c):
            return (alpha, TruncatedSeries.const(P, c))
    gens = N.generators()
    gens = gens[np.asarray(N.group.reduce(gens)).any(axis=1)]
    src = _ring_group(N, extra=1)
    tgt = _sum_group(N, len(gens))
    scal = [(0,) * j + (p,) for j in range(R)] + [ua.symmetric_coeffs()]
    rows = _evaluation_rows(N, gens, scal)
    K = src.kernel(tgt.coords(rows), tgt)
    if len(K) == 0:
        return None
    res = [(int(k[0]) % p, int(k[R]) % p) for k in K]
    combo = _combination_hitting(res, p)
    if combo is None:
        return None
    vec = np.zeros(R + 1, dtype=object)
    for i, c in combo.items():
        vec = (vec + c * K[i]) % p ** m
    lam_inv = pow(int(vec[R]), -1, p ** m)
    b = [(int(x) * lam_inv) % p ** m for x in vec[:R]]
    x = TruncatedSeries.from_coeffs(P, b)
    if not annihilates(N, ua + p * x):
        raise SearchInconclusive("internal: constructed annihilator failed verification")
    return (alpha, x)


def _combination_hitting(res, p):
    """Coefficients c_i with sum c_i res_i = (x, 1) mod p for some x != 0, or None."""
    basis = []  # (vector, combo)
    for i, v in builtins.enumerate(res):
        if v == (0, 0):
            continue
        if not basis:
            basis.append((v, {i: 1}))
        elif len(basis) == 1:
            (a, b), _ = basis[0]
            if (a * v[1] - b * v[0]) % p:
                basis.append((v, {i: 1}))
                break
    if len(basis) == 2:
        (a1, b1), c1 = basis[0]
        (a2, b2), c2 = basis[1]
        det = (a1 * b2 - a2 * b1) % p
        inv = pow(det, -1, p)
        # solve s*(a1,b1) + t*(a2,b2) = (1,1)
        s = ((b2 - a2) * inv) % p
        t = ((a1 - b1) * inv) % p
        out = {}
        for combo, k in ((c1, s), (c2, t)):
            for i, c in combo.items():
                out[i] = (out.get(i, 0) + c * k) % p
        return out
    if len(basis) == 1:
        (a, b), c = basis[0]
        if a % p and b % p:
            k = pow(b, -1, p)
            return {i: (v * k) % p for i, v in c.items()}
    return None


# --- filtration from a presentation ---------------------------------------------


@dataclass(frozen=True)
class FiltrationLengths:
    """Lengths of the canonical pieces found by brute force.

    ``tor_u_tf_rank`` counts the copies of k[[u]] in a composition series of
    the u-torsion-free part of the p-power torsion; its length modulo E is
    e times this number.
    """

    u_infty: int
    tor_u_tf_rank: int
    free_rank: int
    mbar: int
    modpN_u_infty: int
    N: int
    R: int

    def matches(self, pieces: FiltrationPieces) -> bool:
        from .modules import summand_presentation as _sp

        def fin_len(M):
            return sum(module_from_presentation(_sp(s, M.p)).length for s in M.summands)

        tor = sum(s.a for s in pieces.tor_u_tf.summands)
        return (fin_len(pieces.u_infty), tor, pieces.free_rank, fin_len(pieces.mbar)) == (
            self.u_infty, self.tor_u_tf_rank, self.free_rank, self.mbar)


def brute_force_filtration(M: BKModule, n_kill: Optional[int] = None, rounds: int = 3) -> FiltrationLengths:
    """Recover the filtration lengths of a presented module from its truncations.

    With N = 2 n_kill (n_kill: an exponent killing M_tor and Mbar):
      * M[u^infty] is the image of (M/p^(2N))[u^B] in M/(p^N, u^R);
      * (M/p^N)[u^infty] is the image of (M/p^N)[u^B] in M/(p^N, u^R),
        and Mbar is the difference of the two lengths;
      * lengths of M/(p^K, u^L) grow like rank*K*L + d*L + ..., and the
        mixed second difference in (K, L) gives the rank, the first
        difference in L the number d of k[[u]] factors.
    B and R are doubled until every value repeats.
    """
    pres = M.presentation if M.presentation is not None else to_presentation(M)
    n = n_kill if n_kill is not None else pres.params.p_prec
    N = 2 * n
    deg = max([len(x) for row in pres.integer_relations() for x in row] + [1])
    R = 2 * deg + 2
    last = None
    for _ in range(rounds):
        B = R
        try:
            tgt = module_from_presentation(pres, N, R)
            src_full = module_from_presentation(pres, 2 * N, R + B)
            src_modp = module_from_presentation(pres, N, R + B)
        except BudgetExceeded:
            break
        u_b = (0,) * B + (1,)
        k_full = kernel_of_scalar(src_full, u_b, method="linalg")
        k_modp = kernel_of_scalar(src_modp, u_b, method="linalg")
        u_inf = _image_length(src_full, k_full.sub, tgt)
        modp = _image_length(src_modp, k_modp.sub, tgt)

        def ell(K, L):
            return module_from_presentation(pres, K, L).length

        l00, l01, l10, l11 = ell(N, R), ell(N, R + 1), ell(N + 1, R), ell(N + 1, R + 1)
        rank = l11 - l01 - l10 + l00
        d = l01 - l00 - N * rank
        cur = (u_inf, d, rank, modp - u_inf, modp)
        if cur == last:
            return FiltrationLengths(u_inf, d, rank, modp - u_inf, modp, N, R)
        last = cur
        R *= 2
    raise HypothesisUnmet("filtration lengths did not stabilise within the truncation budget")
